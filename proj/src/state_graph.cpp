#include "statemix/state_graph.hpp"

#include <algorithm>
#include <sstream>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace statemix {

std::string to_string(GraphKind kind) { return kind == GraphKind::AT ? "at" : "ac"; }

GraphKind parse_graph_kind(const std::string& s) {
    if (s == "at" || s == "AT") return GraphKind::AT;
    if (s == "ac" || s == "AC") return GraphKind::AC;
    throw DomainError("unknown graph kind '" + s + "'");
}

StateGraph::StateGraph(GraphKind kind, ItemTable items, BySource by_source)
    : kind_(kind), items_(std::move(items)), by_source_(std::move(by_source)) {
    by_source_.prune(0.0);
    by_source_.makeCompressed();
    by_target_ = by_source_;
    by_target_.makeCompressed();

    const Eigen::Index n = by_source_.rows();
    out_strength_ = Eigen::VectorXd::Zero(n);
    in_strength_ = Eigen::VectorXd::Zero(n);
    for (Eigen::Index s = 0; s < n; ++s)
        for (BySource::InnerIterator it(by_source_, s); it; ++it) out_strength_(s) += it.value();
    for (Eigen::Index t = 0; t < n; ++t)
        for (ByTarget::InnerIterator it(by_target_, t); it; ++it) in_strength_(t) += it.value();
}

StateGraph StateGraph::from_edges(GraphKind kind, ItemTable items, std::span<const Edge> edges) {
    const auto n = static_cast<Eigen::Index>(2 * items.size());
    std::vector<Eigen::Triplet<double, std::int32_t>> triplets;
    triplets.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.from.value < 0 || e.from.value >= n || e.to.value < 0 || e.to.value >= n)
            throw DomainError("edge endpoint outside state range");
        if (e.weight < 0.0) throw DomainError("negative edge weight");
        triplets.emplace_back(e.from.value, e.to.value, e.weight);
    }
    BySource m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return StateGraph(kind, std::move(items), std::move(m));
}

double StateGraph::weight(StateId from, StateId to) const {
    return by_source_.coeff(from.value, to.value);
}

StateGraph build_at_graph(const TrainingIndex& train) {
    std::vector<Eigen::Triplet<double, std::int32_t>> triplets;
    for (const auto& p : train.profiles()) {
        for (std::size_t k = 1; k < p.sequence.size(); ++k) {
            StateId from(p.sequence[k - 1].item, p.sequence[k - 1].polarity);
            StateId to(p.sequence[k].item, p.sequence[k].polarity);
            triplets.emplace_back(from.value, to.value, 1.0);
        }
    }
    const auto n = static_cast<Eigen::Index>(train.state_count());
    StateGraph::BySource m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return StateGraph(GraphKind::AT, train.items(), std::move(m));
}

StateGraph build_at_graph(const InteractionLog& train, double like_threshold) {
    return build_at_graph(TrainingIndex(train, like_threshold));
}

StateGraph build_ac_graph(const TrainingIndex& train, int threads) {
    const auto n = static_cast<std::int32_t>(train.state_count());
    const auto& profiles = train.profiles();

    // state -> profiles holding it
    std::vector<std::vector<std::int32_t>> holders(static_cast<std::size_t>(n));
    for (std::size_t pi = 0; pi < profiles.size(); ++pi)
        for (const auto& e : profiles[pi].sequence)
            holders[static_cast<std::size_t>(StateId(e.item, e.polarity).value)].push_back(
                static_cast<std::int32_t>(pi));

    // Row a counts, for each state b, the users holding both a and b.
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel num_threads(std::max(1, threads))
#endif
    {
        std::vector<std::int32_t> count(static_cast<std::size_t>(n), 0);
        std::vector<std::int32_t> touched;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 16)
#endif
        for (std::int32_t a = 0; a < n; ++a) {
            const ItemIndex item_a = StateId(a).item();
            for (auto pi : holders[static_cast<std::size_t>(a)]) {
                for (const auto& e : profiles[static_cast<std::size_t>(pi)].sequence) {
                    if (e.item == item_a) continue;
                    auto b = StateId(e.item, e.polarity).value;
                    if (count[static_cast<std::size_t>(b)]++ == 0) touched.push_back(b);
                }
            }
            std::sort(touched.begin(), touched.end());
            auto& row = rows[static_cast<std::size_t>(a)];
            row.reserve(touched.size());
            for (auto b : touched) {
                row.emplace_back(b, static_cast<double>(count[static_cast<std::size_t>(b)]));
                count[static_cast<std::size_t>(b)] = 0;
            }
            touched.clear();
        }
    }
    (void)threads;

    std::size_t nnz = 0;
    for (const auto& r : rows) nnz += r.size();
    StateGraph::BySource m(n, n);
    m.reserve(static_cast<Eigen::Index>(nnz));
    for (std::int32_t a = 0; a < n; ++a) {
        m.startVec(a);
        for (const auto& [b, w] : rows[static_cast<std::size_t>(a)]) m.insertBack(a, b) = w;
        std::vector<std::pair<std::int32_t, double>>().swap(rows[static_cast<std::size_t>(a)]);
    }
    m.finalize();
    return StateGraph(GraphKind::AC, train.items(), std::move(m));
}

StateGraph build_ac_graph(const InteractionLog& train, double like_threshold) {
    return build_ac_graph(TrainingIndex(train, like_threshold));
}

double forward_prob(const StateGraph& graph, StateId from, StateId to) {
    const double out = graph.out_strength(from);
    return out > 0.0 ? graph.weight(from, to) / out : 0.0;
}

double backward_prob(const StateGraph& graph, StateId from, StateId to) {
    const double in = graph.in_strength(to);
    return in > 0.0 ? graph.weight(from, to) / in : 0.0;
}

void write_graph_csv(const StateGraph& graph, std::ostream& out) {
    out << "# kind=" << to_string(graph.kind()) << " items=" << graph.items().size() << '\n';
    out << "item_index,item_id\n";
    for (std::size_t i = 0; i < graph.items().size(); ++i)
        out << i << ',' << graph.items().ids()[i] << '\n';
    out << "from_state,to_state,weight\n";
    const auto& m = graph.by_source();
    for (Eigen::Index s = 0; s < m.outerSize(); ++s)
        for (StateGraph::BySource::InnerIterator it(m, s); it; ++it)
            out << it.row() << ',' << it.col() << ',' << static_cast<long long>(it.value()) << '\n';
}

StateGraph read_graph_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# kind=", 0) != 0)
        throw ParseError("graph CSV: missing kind header");
    std::istringstream header(line.substr(7));
    std::string kind_str, items_field;
    header >> kind_str >> items_field;
    if (items_field.rfind("items=", 0) != 0) throw ParseError("graph CSV: missing item count");
    const GraphKind kind = parse_graph_kind(kind_str);
    const std::size_t n_items = std::stoull(items_field.substr(6));

    if (!std::getline(in, line) || line != "item_index,item_id")
        throw ParseError("graph CSV: missing item table header");
    std::vector<ItemId> ids(n_items);
    for (std::size_t i = 0; i < n_items; ++i) {
        if (!std::getline(in, line)) throw ParseError("graph CSV: truncated item table");
        auto comma = line.find(',');
        if (comma == std::string::npos || std::stoull(line.substr(0, comma)) != i)
            throw ParseError("graph CSV: bad item row '" + line + "'");
        ids[i] = std::stoll(line.substr(comma + 1));
    }
    ItemTable items(ids);
    if (items.ids() != ids) throw ParseError("graph CSV: item table not strictly ascending");

    if (!std::getline(in, line) || line != "from_state,to_state,weight")
        throw ParseError("graph CSV: missing edge header");
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        long long f = 0, t = 0;
        double w = 0;
        char c1 = 0, c2 = 0;
        std::istringstream row(line);
        if (!(row >> f >> c1 >> t >> c2 >> w) || c1 != ',' || c2 != ',')
            throw ParseError("graph CSV: bad edge row '" + line + "'");
        edges.push_back({StateId(static_cast<std::int32_t>(f)), StateId(static_cast<std::int32_t>(t)), w});
    }
    return StateGraph::from_edges(kind, std::move(items), edges);
}

}  // namespace statemix
