#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "statemix/ingest.hpp"
#include "statemix/metrics.hpp"
#include "statemix/models.hpp"
#include "statemix/state_graph.hpp"
#include "statemix/training_index.hpp"

namespace statemix {

enum class DatasetFormat { MovieLens, Netflix, Csv };
enum class Blend { Score, Rank };

DatasetFormat parse_dataset_format(const std::string& s);
Blend parse_blend(const std::string& s);

/// "0:0.05:1" (start:step:stop, inclusive) or a comma list "0,0.5,1".
std::vector<double> parse_alpha_grid(const std::string& text);

/// Shortest decimal form used in CSV rows and histogram file names.
std::string format_alpha(double alpha);

struct ExperimentConfig {
    std::string dataset;
    DatasetFormat format = DatasetFormat::MovieLens;
    double train_fraction = 0.9;
    std::size_t list_size = 10;
    std::vector<std::string> models = {"hybrid"};
    std::vector<double> alphas = parse_alpha_grid("0:0.05:1");
    GraphKind graph = GraphKind::AT;
    Blend blend = Blend::Score;
    int markov_order = 2;
    std::size_t neighbors = 50;
    double threshold = kDefaultLikeThreshold;
    int threads = 1;
    std::uint64_t seed = 20140630;
    std::string out_dir = ".";
    bool record_timing = true;

    /// Throws DomainError on an out-of-range field.
    void validate() const;
};

InteractionLog load_dataset(const std::string& path, DatasetFormat format);

/// Split, eligible test users and their judgments, built once per dataset.
class Evaluation {
public:
    Evaluation(const InteractionLog& log, double train_fraction, std::size_t list_size,
               double threshold = kDefaultLikeThreshold);

    const SplitDataset& split() const { return split_; }
    const TrainingIndex& train() const { return train_; }
    std::size_t list_size() const { return list_size_; }

    /// Eligible test users, ascending.
    const std::vector<UserId>& users() const { return users_; }
    /// Like-rated test items that are candidates of the user, aligned with users().
    const std::vector<RelevantItems>& relevant() const { return relevant_; }

private:
    SplitDataset split_;
    TrainingIndex train_;
    std::size_t list_size_;
    std::vector<UserId> users_;
    std::vector<RelevantItems> relevant_;
};

struct UserOutcome {
    std::vector<ItemIndex> top;
    std::optional<double> recovery;
};

struct ModelRun {
    MetricsReport report;
    std::vector<UserOutcome> outcomes;
};

/// Full candidate ordering for a user, best first.
using Ranker = std::function<std::vector<ItemIndex>(UserId)>;

/// Folds per-user outcomes into the five metrics in user order.
MetricsReport summarize(const Evaluation& eval, std::span<const UserOutcome> outcomes,
                        const DiversityOptions& diversity = {});

ModelRun evaluate_ranker(const Evaluation& eval, const Ranker& ranker, int threads = 1);

/// PM and SM are scored once per user and blended for every alpha.
std::vector<ModelRun> evaluate_hybrid_sweep(const Evaluation& eval, const StateGraph& graph,
                                            std::span<const double> alphas, Blend blend,
                                            int threads = 1);

/// Seeded uniform shuffle of the user's candidates.
std::vector<ItemIndex> random_ranking(const TrainingIndex& train, UserId user, std::uint64_t seed);

/// Recommended-item occurrences by training popularity, in power-of-two
/// bins [0,1), [1,2), [2,4), ... up to the most popular training item.
struct DegreeHistogram {
    std::vector<std::int64_t> bin_low;
    std::vector<std::int64_t> bin_high;
    std::vector<std::size_t> counts;

    std::size_t total() const;
    double mean_bin_index() const;
};

DegreeHistogram emit_degree_histogram(std::span<const std::vector<ItemIndex>> lists,
                                      const Eigen::VectorXi& train_item_counts);
void write_histogram_csv(const DegreeHistogram& h, std::ostream& out);

struct DatasetStats {
    std::size_t users = 0;
    std::size_t items = 0;
    std::size_t ratings = 0;
    std::int64_t first_timestamp = 0;
    std::int64_t last_timestamp = 0;
    std::size_t skipped_lines = 0;
    /// Item rating-count percentiles at 50/75/90/99/100.
    std::vector<std::size_t> degree_percentiles;
    /// Share of ratings held by the ceil(20%) most-rated items.
    double top20_share = 0.0;
};

DatasetStats dataset_stats(const InteractionLog& log);
void write_stats(const DatasetStats& stats, std::ostream& out);

struct ExperimentResult {
    DatasetStats stats;
    std::vector<MetricsReport> rows;
    std::vector<std::string> histogram_files;
};

/// Runs every requested model, writes metrics.csv, hist_<model>_<alpha>.csv
/// and stats.txt into config.out_dir, and returns the rows.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace statemix
