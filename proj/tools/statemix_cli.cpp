// Offline benchmark driver: loads a rating dataset, sweeps the requested
// models and writes metrics.csv, degree histograms and dataset statistics.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "statemix/experiment.hpp"

int main(int argc, char** argv) {
    using namespace statemix;

    CLI::App app{"statemix - polarity-state recommender benchmark"};
    app.set_config("--config", "", "Key=value experiment file; command-line flags override it");

    ExperimentConfig config;
    std::string format = "movielens";
    std::vector<std::string> models{"hybrid"};
    std::vector<std::string> alpha_grid{"0:0.05:1"};
    std::string graph = "at";
    std::string blend = "score";
    bool no_timing = false;
    bool stats_only = false;

    app.add_option("--dataset", config.dataset, "Ratings file (or Netflix directory)")->required();
    app.add_option("--format", format, "movielens | netflix | csv")
        ->check(CLI::IsMember({"movielens", "netflix", "csv"}));
    app.add_option("--train-fraction", config.train_fraction, "Chronological training share")
        ->capture_default_str();
    app.add_option("--list-size", config.list_size, "Recommendation list size N")->capture_default_str();
    app.add_option("--models", models,
                   "Comma list of pm,sm,hybrid,usercf,itemcf,popularity,markov,random")
        ->delimiter(',');
    app.add_option("--alpha-grid", alpha_grid, "start:step:stop or comma list")->delimiter(',');
    app.add_option("--graph", graph, "at | ac")->check(CLI::IsMember({"at", "ac"}));
    app.add_option("--blend", blend, "score | rank")->check(CLI::IsMember({"score", "rank"}));
    app.add_option("--markov-order", config.markov_order, "Classic Markov order m")->capture_default_str();
    app.add_option("--neighbors", config.neighbors, "User-CF neighbours (0 = all raters)")
        ->capture_default_str();
    app.add_option("--threshold", config.threshold, "Like/Dislike rating threshold")->capture_default_str();
    app.add_option("--threads", config.threads, "Worker threads")->capture_default_str();
    app.add_option("--seed", config.seed, "Seed for the random ranker")->capture_default_str();
    app.add_option("--out", config.out_dir, "Output directory")->capture_default_str();
    app.add_flag("--no-timing", no_timing, "Write runtime_ms as 0 for byte-stable reruns");
    app.add_flag("--stats-only", stats_only, "Only write stats.txt");

    CLI11_PARSE(app, argc, argv);

    try {
        config.format = parse_dataset_format(format);
        config.graph = parse_graph_kind(graph);
        config.blend = parse_blend(blend);
        std::string grid;
        for (const auto& a : alpha_grid) grid += (grid.empty() ? "" : ",") + a;
        config.alphas = parse_alpha_grid(grid);
        config.record_timing = !no_timing;
        config.models.clear();
        for (const auto& m : models)
            if (!m.empty()) config.models.push_back(m);

        if (stats_only) {
            const auto data = load_dataset(config.dataset, config.format);
            write_stats(dataset_stats(data), std::cout);
            return 0;
        }

        const auto result = run_experiment(config, &std::cerr);
        std::cout << kMetricsCsvHeader << '\n';
        for (const auto& row : result.rows) std::cout << to_csv_row(row) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "statemix: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
