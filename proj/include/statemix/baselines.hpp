#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "statemix/models.hpp"
#include "statemix/training_index.hpp"

namespace statemix {

/// Pearson correlation over co-rated entries, centred on the supplied
/// global means rather than the co-rated means. Returns 0 with fewer than
/// two co-ratings or a zero variance term.
double pearson_similarity(const Eigen::Ref<const Eigen::VectorXd>& ratings_i,
                          const Eigen::Ref<const Eigen::VectorXd>& ratings_j, double mean_i,
                          double mean_j);

/// Pearson similarity of two training users over the items both rated.
double user_similarity(const UserProfile& a, const UserProfile& b);

/// Memory-based user CF. `k_neighbors` caps the raters of the target item
/// used in the weighted sum (those with the largest |similarity|); 0 uses
/// every rater.
class UserCF {
public:
    explicit UserCF(const TrainingIndex& train, std::size_t k_neighbors = 50);

    /// Similarity of `user` to every training profile (indexed like profiles()).
    Eigen::VectorXd similarities(UserId user) const;

    double predict(UserId user, ItemIndex item) const;

    /// Predicted ratings for every candidate of the user.
    ScoreVector scores(UserId user) const;

private:
    double predict_with(const UserProfile& u, const Eigen::VectorXd& sims, std::int32_t self,
                        ItemIndex item) const;
    const UserProfile& require(UserId user) const;

    const TrainingIndex& train_;
    std::size_t k_neighbors_;
};

/// Memory-based item CF with Pearson item-item similarities over co-raters,
/// centred on the items' global means.
class ItemCF {
public:
    explicit ItemCF(const TrainingIndex& train, int threads = 1);

    double similarity(ItemIndex a, ItemIndex b) const { return sim_(a, b); }
    double predict(UserId user, ItemIndex item) const;
    ScoreVector scores(UserId user) const;

private:
    const TrainingIndex& train_;
    Eigen::MatrixXd sim_;
};

/// Unrated training items by descending distinct-user count.
RecommendationList popularity_recommend(const TrainingIndex& train, UserId user, std::size_t n);
std::vector<ItemIndex> popularity_ranking(const TrainingIndex& train, UserId user);

/// Order-m item-sequence Markov chain over deduplicated training sequences.
class ClassicMarkov {
public:
    ClassicMarkov(const TrainingIndex& train, int order = 2);

    int order() const { return order_; }

    /// Number of training users whose sequence contains `gram` contiguously.
    std::size_t count(std::span<const ItemIndex> gram) const;

    /// count(context + next) / count(context), 0 for an unseen context.
    double transition(std::span<const ItemIndex> context, ItemIndex next) const;

    struct Scored {
        ScoreVector scores;
        int order_used = 0;  // 0 when no context has a continuation
    };

    /// Scores candidates from the longest suffix of the user's history that
    /// has a continuation in training, backing off down to order 1.
    Scored scores(UserId user) const;

    /// Full candidate ordering: score, then popularity, then item.
    std::vector<ItemIndex> ranking(UserId user) const;

    RecommendationList recommend(UserId user, std::size_t n) const;

private:
    struct GramHash {
        std::size_t operator()(const std::vector<ItemIndex>& g) const noexcept;
    };
    using Followers = std::vector<std::pair<ItemIndex, std::uint32_t>>;

    const TrainingIndex& train_;
    int order_;
    // per order k (1-based index k-1): k-gram -> users visiting it
    std::vector<std::unordered_map<std::vector<ItemIndex>, std::uint32_t, GramHash>> counts_;
    // per order k: k-gram -> (next item, count of the (k+1)-gram)
    std::vector<std::unordered_map<std::vector<ItemIndex>, Followers, GramHash>> followers_;
};

}  // namespace statemix
