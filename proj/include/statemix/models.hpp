#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "statemix/state_graph.hpp"
#include "statemix/training_index.hpp"

namespace statemix {

enum class ModelTag { PM, SM, Hybrid, HybridRank, UserCF, ItemCF, Popularity, ClassicMarkov, Random };

std::string to_string(ModelTag tag);

/// A user's training ratings as weighted polarity states.
struct UserState {
    std::vector<StateId> sub_states;
    Eigen::VectorXd weights;
};

/// Uniform 1/m weights over the user's deduplicated training ratings.
/// Throws DomainError for a user without training history.
UserState user_state(const TrainingIndex& train, UserId user);

enum class ScoreOrder { HigherIsBetter, LowerIsBetter };

/// Scores aligned with an ascending candidate list.
struct ScoreVector {
    ModelTag tag = ModelTag::PM;
    ScoreOrder order = ScoreOrder::HigherIsBetter;
    std::vector<ItemIndex> candidates;
    Eigen::VectorXd scores;

    double score_of(ItemIndex item) const;
};

/// Sum over sub-states of weight * forward_prob into the L state minus the
/// same into the D state.
ScoreVector pm_scores(const StateGraph& graph, const UserState& state,
                      std::span<const ItemIndex> candidates);

/// As pm_scores with backward probabilities.
ScoreVector sm_scores(const StateGraph& graph, const UserState& state,
                      std::span<const ItemIndex> candidates);

/// alpha * sm + (1 - alpha) * pm.
ScoreVector hybrid_scores(const ScoreVector& pm, const ScoreVector& sm, double alpha);

/// alpha * rank_sm + (1 - alpha) * rank_pm with 1-based ranks; lower is better.
ScoreVector hybrid_ranks(const ScoreVector& pm, const ScoreVector& sm, double alpha);

/// All candidates best first; ties by ascending item.
std::vector<ItemIndex> rank_order(const ScoreVector& scores);

/// 1-based rank of every candidate, aligned with scores.candidates.
Eigen::VectorXd ranks_of(const ScoreVector& scores);

struct RecommendationList {
    std::vector<ItemIndex> items;
    bool short_list = false;
};

RecommendationList top_n(const ScoreVector& scores, std::size_t n);

/// Prefix of an ordering, flagged short when it has fewer than n entries.
RecommendationList top_n(std::span<const ItemIndex> ranking, std::size_t n);

}  // namespace statemix
