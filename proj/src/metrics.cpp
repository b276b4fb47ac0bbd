#include "statemix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <unordered_map>

namespace statemix {

namespace {

bool contains(const RelevantItems& relevant, ItemIndex item) {
    return std::binary_search(relevant.begin(), relevant.end(), item);
}

// both sorted
std::size_t common_items(const std::vector<ItemIndex>& a, const std::vector<ItemIndex>& b) {
    std::size_t c = 0;
    auto ia = a.begin(), ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++c;
            ++ia;
            ++ib;
        }
    }
    return c;
}

}  // namespace

std::optional<double> user_recovery(std::span<const ItemIndex> ranking, const RelevantItems& relevant) {
    if (relevant.empty() || ranking.empty()) return std::nullopt;
    double sum = 0.0;
    std::size_t found = 0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        if (contains(relevant, ranking[r])) {
            sum += static_cast<double>(r + 1);
            ++found;
        }
    }
    if (found != relevant.size()) throw DomainError("relevant item missing from candidate ranking");
    return sum / static_cast<double>(ranking.size()) / static_cast<double>(relevant.size());
}

std::optional<double> recovery(std::span<const std::vector<ItemIndex>> rankings,
                               std::span<const RelevantItems> judgments) {
    if (rankings.size() != judgments.size()) throw DomainError("rankings and judgments differ in size");
    double sum = 0.0;
    std::size_t users = 0;
    for (std::size_t u = 0; u < rankings.size(); ++u) {
        if (auto v = user_recovery(rankings[u], judgments[u])) {
            sum += *v;
            ++users;
        }
    }
    if (users == 0) return std::nullopt;
    return sum / static_cast<double>(users);
}

std::size_t hits(std::span<const ItemIndex> list, const RelevantItems& relevant) {
    std::size_t h = 0;
    for (auto item : list)
        if (contains(relevant, item)) ++h;
    return h;
}

std::optional<double> precision_at_n(std::span<const std::vector<ItemIndex>> lists,
                                     std::span<const RelevantItems> judgments, std::size_t n) {
    if (n == 0) throw DomainError("list size must be positive");
    if (lists.size() != judgments.size()) throw DomainError("lists and judgments differ in size");
    double sum = 0.0;
    std::size_t users = 0;
    for (std::size_t u = 0; u < lists.size(); ++u) {
        if (judgments[u].empty()) continue;
        if (lists[u].size() > n) throw DomainError("list longer than n");
        sum += static_cast<double>(hits(lists[u], judgments[u])) / static_cast<double>(n);
        ++users;
    }
    if (users == 0) return std::nullopt;
    return sum / static_cast<double>(users);
}

double coverage_entropy(std::span<const std::vector<ItemIndex>> lists) {
    std::map<ItemIndex, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& list : lists) {
        for (auto item : list) ++counts[item];
        total += list.size();
    }
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const auto& [item, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

std::optional<DiversityResult> interlist_diversity(std::span<const std::vector<ItemIndex>> lists,
                                                   std::size_t n, const DiversityOptions& opts) {
    if (n == 0) throw DomainError("list size must be positive");
    const std::size_t users = lists.size();
    if (users < 2) return std::nullopt;
    std::vector<std::vector<ItemIndex>> sorted(lists.begin(), lists.end());
    for (auto& l : sorted) std::sort(l.begin(), l.end());
    DiversityResult out;
    double sum = 0.0;
    if (users <= opts.exact_user_limit) {
        for (std::size_t i = 0; i < users; ++i)
            for (std::size_t j = i + 1; j < users; ++j)
                sum += 1.0 - static_cast<double>(common_items(sorted[i], sorted[j])) / static_cast<double>(n);
        out.pairs = users * (users - 1) / 2;
    } else {
        std::mt19937_64 rng(opts.seed);
        std::uniform_int_distribution<std::size_t> pick(0, users - 1);
        for (std::size_t s = 0; s < opts.sample_pairs; ++s) {
            std::size_t i = pick(rng), j = pick(rng);
            while (j == i) j = pick(rng);
            sum += 1.0 - static_cast<double>(common_items(sorted[i], sorted[j])) / static_cast<double>(n);
        }
        out.pairs = opts.sample_pairs;
        out.sampled = true;
        out.seed = opts.seed;
    }
    out.value = sum / static_cast<double>(out.pairs);
    return out;
}

double self_info_novelty(std::span<const std::vector<ItemIndex>> lists,
                         const Eigen::VectorXi& train_item_counts, std::size_t test_user_count) {
    if (lists.empty()) return 0.0;
    const double population = static_cast<double>(test_user_count);
    double sum = 0.0;
    for (const auto& list : lists) {
        for (auto item : list) {
            const int rels = std::max(1, train_item_counts(item));
            sum += std::log2(population / rels);
        }
    }
    return sum / static_cast<double>(lists.size());
}

std::string to_csv_row(const MetricsReport& r) {
    auto num = [](std::optional<double> v) -> std::string {
        if (!v) return "";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", *v);
        return buf;
    };
    std::string alpha;
    if (r.alpha) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", *r.alpha);
        alpha = buf;
    }
    return r.model + ',' + r.graph + ',' + alpha + ',' + std::to_string(r.n) + ',' + num(r.recovery) +
           ',' + num(r.precision) + ',' + num(r.coverage_bits) + ',' + num(r.diversity) + ',' +
           num(r.novelty_bits) + ',' + std::to_string(r.test_users) + ',' +
           std::to_string(r.runtime_ms);
}

}  // namespace statemix
