#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "ktree/commands.hpp"

int main(int argc, char** argv) {
    using namespace ktree;

    CLI::App app{"cluster-tree toolkit for sparse document vectors"};
    app.require_subcommand(1);

    PrepareOptions popt;
    auto* prepare = app.add_subcommand("prepare", "tf-idf weight a matrix, keep the top terms");
    prepare->add_option("--matrix", popt.matrix_in, "input matrix file")->required();
    prepare->add_option("--out", popt.matrix_out, "output matrix file")->required();
    prepare->add_option("--keep-terms", popt.keep_terms, "number of terms to keep");

    BuildOptions bopt;
    std::string bmode = "classic";
    auto* build = app.add_subcommand("build", "build a tree from a matrix and serialize it");
    build->add_option("--matrix", bopt.matrix, "input matrix file")->required();
    build->add_option("--out", bopt.tree_out, "output tree file")->required();
    build->add_option("--order", bopt.order, "maximum entries per node");
    build->add_option("--mode", bmode, "centre mode")->check(CLI::IsMember({"classic", "medoid"}));
    build->add_option("--split-k", bopt.split_k, "clusters per node split");
    build->add_option("--seed", bopt.seed, "random seed");
    build->add_flag("--shuffle", bopt.shuffle, "shuffle insertion order");

    ClusterOptions copt;
    std::string cmode = "classic";
    auto* cluster = app.add_subcommand("cluster", "cluster a matrix or a serialized tree");
    cluster->add_option("--matrix", copt.matrix, "matrix to build and cluster");
    cluster->add_option("--tree", copt.tree, "serialized tree to cluster");
    cluster->add_option("--level", copt.level, "tree level to extract (with --tree)");
    cluster->add_option("--labels", copt.labels, "gold label file");
    cluster->add_option("--out", copt.csv_out, "CSV output file");
    cluster->add_flag("--append", copt.append, "append to the CSV file");
    cluster->add_flag("--no-timing", copt.no_timing, "leave the seconds column empty");
    cluster->add_option("--order", copt.order, "maximum entries per node");
    cluster->add_option("--mode", cmode, "centre mode")->check(CLI::IsMember({"classic", "medoid"}));
    cluster->add_option("--split-k", copt.split_k, "clusters per node split");
    cluster->add_option("--seed", copt.seed, "random seed");
    cluster->add_flag("--shuffle", copt.shuffle, "shuffle insertion order");

    SampledOptions sopt;
    auto* sampled = app.add_subcommand("sampled", "sample by medoid, build, assign the rest");
    sampled->add_option("--matrix", sopt.matrix, "input matrix file")->required();
    sampled->add_option("--fraction", sopt.fraction, "sample share in (0, 1]");
    sampled->add_option("--labels", sopt.labels, "gold label file");
    sampled->add_option("--out", sopt.csv_out, "CSV output file");
    sampled->add_flag("--append", sopt.append, "append to the CSV file");
    sampled->add_flag("--no-timing", sopt.no_timing, "leave the seconds column empty");
    sampled->add_option("--order", sopt.order, "maximum entries per node");
    sampled->add_option("--split-k", sopt.split_k, "clusters per node split");
    sampled->add_option("--seed", sopt.seed, "random seed");
    sampled->add_flag("--shuffle", sopt.shuffle, "shuffle insertion order");

    SearchOptions qopt;
    auto* search = app.add_subcommand("search", "nearest-neighbour search in a tree");
    search->add_option("--tree", qopt.tree, "serialized tree file")->required();
    search->add_option("--doc", qopt.doc, "query with a stored doc id");
    search->add_option("--query", qopt.query_file, "query with row 0 of a matrix file");
    search->add_option("--top", qopt.top, "results to print from the reached leaf");

    DumpOptions dopt;
    auto* dump = app.add_subcommand("dump", "print a tree as indented text");
    dump->add_option("--tree", dopt.tree, "serialized tree file")->required();
    dump->add_option("--depth-limit", dopt.depth_limit, "deepest level to print (<=0: all)");

    EvalOptions eopt;
    auto* eval = app.add_subcommand("eval", "score a serialized tree against labels");
    eval->add_option("--tree", eopt.tree, "serialized tree file")->required();
    eval->add_option("--labels", eopt.labels, "gold label file")->required();
    eval->add_option("--level", eopt.level, "tree level to extract");
    eval->add_option("--out", eopt.csv_out, "CSV output file");
    eval->add_flag("--append", eopt.append, "append to the CSV file");
    eval->add_flag("--no-timing", eopt.no_timing, "leave the seconds column empty");

    CLI11_PARSE(app, argc, argv);

    if (prepare->parsed()) return cmd_prepare(popt, std::cout, std::cerr);
    if (build->parsed()) {
        bopt.mode = mode_from_string(bmode);
        return cmd_build(bopt, std::cout, std::cerr);
    }
    if (cluster->parsed()) {
        copt.mode = mode_from_string(cmode);
        return cmd_cluster(copt, std::cout, std::cerr);
    }
    if (sampled->parsed()) return cmd_sampled(sopt, std::cout, std::cerr);
    if (search->parsed()) return cmd_search(qopt, std::cout, std::cerr);
    if (dump->parsed()) return cmd_dump(dopt, std::cout, std::cerr);
    if (eval->parsed()) return cmd_eval(eopt, std::cout, std::cerr);
    return 1;
}
