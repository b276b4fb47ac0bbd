#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "statemix/types.hpp"

namespace statemix {

/// Items a test user rated Like in the test split, restricted to that
/// user's candidates; sorted ascending.
using RelevantItems = std::vector<ItemIndex>;

/// Mean normalised rank (1/L) * sum r_i / C of the relevant items in a full
/// candidate ranking. Empty when the user has no relevant items.
std::optional<double> user_recovery(std::span<const ItemIndex> ranking, const RelevantItems& relevant);

/// Average of user_recovery over users with relevant items.
std::optional<double> recovery(std::span<const std::vector<ItemIndex>> rankings,
                               std::span<const RelevantItems> judgments);

std::size_t hits(std::span<const ItemIndex> list, const RelevantItems& relevant);

/// Mean of |list ∩ relevant| / n over users with relevant items.
std::optional<double> precision_at_n(std::span<const std::vector<ItemIndex>> lists,
                                     std::span<const RelevantItems> judgments, std::size_t n);

/// Shannon entropy in bits of recommendation-slot shares c_i / sum c.
double coverage_entropy(std::span<const std::vector<ItemIndex>> lists);

struct DiversityResult {
    double value = 0.0;
    std::size_t pairs = 0;
    bool sampled = false;
    std::uint64_t seed = 0;
};

struct DiversityOptions {
    std::size_t exact_user_limit = 2000;
    std::size_t sample_pairs = 100000;
    std::uint64_t seed = 20140630;
};

/// Mean over user pairs of 1 - common/n. Exact below the user limit,
/// otherwise uniformly sampled distinct pairs. Empty for fewer than 2 lists.
std::optional<DiversityResult> interlist_diversity(std::span<const std::vector<ItemIndex>> lists,
                                                   std::size_t n, const DiversityOptions& opts = {});

/// Mean over lists of sum log2(test_users / rels_i), rels_i floored at 1.
double self_info_novelty(std::span<const std::vector<ItemIndex>> lists,
                         const Eigen::VectorXi& train_item_counts, std::size_t test_user_count);

struct MetricsReport {
    std::string model;
    std::string graph;
    std::optional<double> alpha;
    std::size_t n = 0;
    std::optional<double> recovery;
    std::optional<double> precision;
    double coverage_bits = 0.0;
    std::optional<double> diversity;
    double novelty_bits = 0.0;
    std::size_t test_users = 0;
    std::int64_t runtime_ms = 0;
};

inline constexpr const char* kMetricsCsvHeader =
    "model,graph,alpha,n,recovery,precision,coverage_bits,diversity,novelty_bits,test_users,runtime_ms";

/// One CSV row without trailing newline; absent values are empty fields.
std::string to_csv_row(const MetricsReport& r);

}  // namespace statemix
