#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include <Eigen/SparseCore>

#include "statemix/ingest.hpp"
#include "statemix/training_index.hpp"
#include "statemix/types.hpp"

namespace statemix {

enum class GraphKind { AT, AC };

std::string to_string(GraphKind kind);
GraphKind parse_graph_kind(const std::string& s);

struct Edge {
    StateId from;
    StateId to;
    double weight = 0.0;
};

/// Weighted directed graph over the 2*I polarity states.
///
/// Weights are user counts (integral values held as double). Stored twice:
/// compressed by source for forward scans and by target for backward scans.
/// Strengths are the weighted out/in degrees.
class StateGraph {
public:
    using BySource = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int32_t>;
    using ByTarget = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int32_t>;

    StateGraph() = default;
    StateGraph(GraphKind kind, ItemTable items, BySource by_source);

    /// Duplicate edges are summed; zero-weight edges are dropped.
    static StateGraph from_edges(GraphKind kind, ItemTable items, std::span<const Edge> edges);

    GraphKind kind() const { return kind_; }
    const ItemTable& items() const { return items_; }
    Eigen::Index state_count() const { return by_source_.rows(); }

    double weight(StateId from, StateId to) const;
    double out_strength(StateId s) const { return out_strength_(s.value); }
    double in_strength(StateId s) const { return in_strength_(s.value); }
    const Eigen::VectorXd& out_strengths() const { return out_strength_; }
    const Eigen::VectorXd& in_strengths() const { return in_strength_; }

    const BySource& by_source() const { return by_source_; }
    const ByTarget& by_target() const { return by_target_; }

    Eigen::Index edge_count() const { return by_source_.nonZeros(); }
    double total_weight() const { return out_strength_.sum(); }

private:
    GraphKind kind_ = GraphKind::AT;
    ItemTable items_;
    BySource by_source_;
    ByTarget by_target_;
    Eigen::VectorXd out_strength_;
    Eigen::VectorXd in_strength_;
};

/// One edge per consecutive pair in each user's deduplicated time-ordered
/// history.
StateGraph build_at_graph(const TrainingIndex& train);
StateGraph build_at_graph(const InteractionLog& train, double like_threshold = kDefaultLikeThreshold);

/// Both directions of every unordered pair of items a user rated, with
/// each endpoint's polarity taken from that user's rating.
StateGraph build_ac_graph(const TrainingIndex& train, int threads = 1);
StateGraph build_ac_graph(const InteractionLog& train, double like_threshold = kDefaultLikeThreshold);

/// weight(from,to) / out_strength(from), 0 for a source without out-edges.
double forward_prob(const StateGraph& graph, StateId from, StateId to);

/// weight(from,to) / in_strength(to), 0 for a target without in-edges.
double backward_prob(const StateGraph& graph, StateId from, StateId to);

/// Edge list with a kind header and the item table; lossless round trip.
void write_graph_csv(const StateGraph& graph, std::ostream& out);
StateGraph read_graph_csv(std::istream& in);

}  // namespace statemix
