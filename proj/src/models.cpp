#include "statemix/models.hpp"

#include <algorithm>
#include <numeric>

namespace statemix {

std::string to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::PM: return "pm";
        case ModelTag::SM: return "sm";
        case ModelTag::Hybrid: return "hybrid";
        case ModelTag::HybridRank: return "hybrid-rank";
        case ModelTag::UserCF: return "usercf";
        case ModelTag::ItemCF: return "itemcf";
        case ModelTag::Popularity: return "popularity";
        case ModelTag::ClassicMarkov: return "markov";
        case ModelTag::Random: return "random";
    }
    return "unknown";
}

UserState user_state(const TrainingIndex& train, UserId user) {
    const UserProfile* p = train.profile(user);
    if (!p || p->sequence.empty())
        throw DomainError("user " + std::to_string(user) + " has no training history");
    UserState s;
    s.sub_states.reserve(p->sequence.size());
    for (const auto& e : p->sequence) s.sub_states.emplace_back(e.item, e.polarity);
    const auto m = static_cast<Eigen::Index>(s.sub_states.size());
    s.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    return s;
}

double ScoreVector::score_of(ItemIndex item) const {
    auto it = std::lower_bound(candidates.begin(), candidates.end(), item);
    if (it == candidates.end() || *it != item) throw DomainError("item is not a candidate");
    return scores(it - candidates.begin());
}

namespace {

enum class Direction { Forward, Backward };

ScoreVector polarity_difference(const StateGraph& graph, const UserState& state,
                                std::span<const ItemIndex> candidates, Direction dir) {
    // Mass reaching each state from the user's sub-states. Forward mass is
    // normalised per source; backward mass per target once summed.
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(graph.state_count());
    const auto& m = graph.by_source();
    for (std::size_t k = 0; k < state.sub_states.size(); ++k) {
        const StateId s = state.sub_states[k];
        double coef = state.weights(static_cast<Eigen::Index>(k));
        if (dir == Direction::Forward) {
            const double out = graph.out_strength(s);
            if (out <= 0.0) continue;
            coef /= out;
        }
        for (StateGraph::BySource::InnerIterator it(m, s.value); it; ++it)
            mass(it.col()) += coef * it.value();
    }
    if (dir == Direction::Backward) {
        const auto& in = graph.in_strengths();
        mass = (in.array() > 0.0).select(mass.array() / in.array(), 0.0);
    }

    ScoreVector out;
    out.tag = dir == Direction::Forward ? ModelTag::PM : ModelTag::SM;
    out.candidates.assign(candidates.begin(), candidates.end());
    std::sort(out.candidates.begin(), out.candidates.end());
    out.scores.resize(static_cast<Eigen::Index>(out.candidates.size()));
    for (std::size_t c = 0; c < out.candidates.size(); ++c) {
        const ItemIndex i = out.candidates[c];
        out.scores(static_cast<Eigen::Index>(c)) =
            mass(StateId(i, Polarity::Like).value) - mass(StateId(i, Polarity::Dislike).value);
    }
    return out;
}

void require_same_keys(const ScoreVector& a, const ScoreVector& b, double alpha) {
    if (a.candidates != b.candidates) throw DomainError("score vectors have different candidates");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
}

}  // namespace

ScoreVector pm_scores(const StateGraph& graph, const UserState& state,
                      std::span<const ItemIndex> candidates) {
    return polarity_difference(graph, state, candidates, Direction::Forward);
}

ScoreVector sm_scores(const StateGraph& graph, const UserState& state,
                      std::span<const ItemIndex> candidates) {
    return polarity_difference(graph, state, candidates, Direction::Backward);
}

ScoreVector hybrid_scores(const ScoreVector& pm, const ScoreVector& sm, double alpha) {
    require_same_keys(pm, sm, alpha);
    ScoreVector out;
    out.tag = ModelTag::Hybrid;
    out.candidates = pm.candidates;
    out.scores = alpha * sm.scores + (1.0 - alpha) * pm.scores;
    return out;
}

ScoreVector hybrid_ranks(const ScoreVector& pm, const ScoreVector& sm, double alpha) {
    require_same_keys(pm, sm, alpha);
    ScoreVector out;
    out.tag = ModelTag::HybridRank;
    out.order = ScoreOrder::LowerIsBetter;
    out.candidates = pm.candidates;
    out.scores = alpha * ranks_of(sm) + (1.0 - alpha) * ranks_of(pm);
    return out;
}

std::vector<ItemIndex> rank_order(const ScoreVector& scores) {
    std::vector<Eigen::Index> pos(scores.candidates.size());
    std::iota(pos.begin(), pos.end(), Eigen::Index{0});
    const bool higher = scores.order == ScoreOrder::HigherIsBetter;
    std::sort(pos.begin(), pos.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double sa = scores.scores(a), sb = scores.scores(b);
        if (sa != sb) return higher ? sa > sb : sa < sb;
        return scores.candidates[static_cast<std::size_t>(a)] <
               scores.candidates[static_cast<std::size_t>(b)];
    });
    std::vector<ItemIndex> out;
    out.reserve(pos.size());
    for (auto p : pos) out.push_back(scores.candidates[static_cast<std::size_t>(p)]);
    return out;
}

Eigen::VectorXd ranks_of(const ScoreVector& scores) {
    const auto order = rank_order(scores);
    Eigen::VectorXd ranks(static_cast<Eigen::Index>(order.size()));
    for (std::size_t r = 0; r < order.size(); ++r) {
        auto it = std::lower_bound(scores.candidates.begin(), scores.candidates.end(), order[r]);
        ranks(it - scores.candidates.begin()) = static_cast<double>(r + 1);
    }
    return ranks;
}

RecommendationList top_n(std::span<const ItemIndex> ranking, std::size_t n) {
    if (n == 0) throw DomainError("list size must be positive");
    RecommendationList list;
    const std::size_t take = std::min(n, ranking.size());
    list.items.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(take));
    list.short_list = take < n;
    return list;
}

RecommendationList top_n(const ScoreVector& scores, std::size_t n) {
    if (n == 0) throw DomainError("list size must be positive");
    if (scores.candidates.empty()) throw DomainError("no candidates to rank");
    const auto order = rank_order(scores);
    return top_n(std::span<const ItemIndex>(order), n);
}

}  // namespace statemix
