#include "statemix/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace statemix {

double pearson_similarity(const Eigen::Ref<const Eigen::VectorXd>& ratings_i,
                          const Eigen::Ref<const Eigen::VectorXd>& ratings_j, double mean_i,
                          double mean_j) {
    if (ratings_i.size() != ratings_j.size())
        throw DomainError("co-rating vectors differ in length");
    if (ratings_i.size() < 2) return 0.0;
    const Eigen::ArrayXd di = ratings_i.array() - mean_i;
    const Eigen::ArrayXd dj = ratings_j.array() - mean_j;
    const double vi = di.square().sum();
    const double vj = dj.square().sum();
    if (vi <= 0.0 || vj <= 0.0) return 0.0;
    return (di * dj).sum() / (std::sqrt(vi) * std::sqrt(vj));
}

double user_similarity(const UserProfile& a, const UserProfile& b) {
    std::vector<double> ra, rb;
    auto ia = a.by_item.begin(), ib = b.by_item.begin();
    while (ia != a.by_item.end() && ib != b.by_item.end()) {
        if (ia->item < ib->item) {
            ++ia;
        } else if (ib->item < ia->item) {
            ++ib;
        } else {
            ra.push_back(ia->rating);
            rb.push_back(ib->rating);
            ++ia;
            ++ib;
        }
    }
    return pearson_similarity(Eigen::Map<const Eigen::VectorXd>(ra.data(), static_cast<Eigen::Index>(ra.size())),
                              Eigen::Map<const Eigen::VectorXd>(rb.data(), static_cast<Eigen::Index>(rb.size())),
                              a.mean_rating, b.mean_rating);
}

// ---------------------------------------------------------------------------
// User-based CF

UserCF::UserCF(const TrainingIndex& train, std::size_t k_neighbors)
    : train_(train), k_neighbors_(k_neighbors) {}

const UserProfile& UserCF::require(UserId user) const {
    const UserProfile* p = train_.profile(user);
    if (!p || p->sequence.empty())
        throw DomainError("user " + std::to_string(user) + " has no training ratings");
    return *p;
}

Eigen::VectorXd UserCF::similarities(UserId user) const {
    const UserProfile& u = require(user);
    const auto n = static_cast<Eigen::Index>(train_.profiles().size());
    Eigen::VectorXd num = Eigen::VectorXd::Zero(n), su = Eigen::VectorXd::Zero(n),
                    sh = Eigen::VectorXd::Zero(n);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(n);
    const auto& profiles = train_.profiles();
    for (const auto& e : u.by_item) {
        const double du = e.rating - u.mean_rating;
        for (const auto& r : train_.raters(e.item)) {
            const double dh = r.rating - profiles[static_cast<std::size_t>(r.profile)].mean_rating;
            num(r.profile) += du * dh;
            su(r.profile) += du * du;
            sh(r.profile) += dh * dh;
            count(r.profile) += 1;
        }
    }
    Eigen::VectorXd sims = Eigen::VectorXd::Zero(n);
    for (Eigen::Index h = 0; h < n; ++h) {
        if (profiles[static_cast<std::size_t>(h)].user == user) continue;
        if (count(h) >= 2 && su(h) > 0.0 && sh(h) > 0.0)
            sims(h) = num(h) / (std::sqrt(su(h)) * std::sqrt(sh(h)));
    }
    return sims;
}

double UserCF::predict_with(const UserProfile& u, const Eigen::VectorXd& sims, std::int32_t self,
                            ItemIndex item) const {
    struct Neighbor {
        std::int32_t profile;
        double sim;
        int rating;
    };
    std::vector<Neighbor> pool;
    for (const auto& r : train_.raters(item)) {
        if (r.profile == self) continue;
        const double s = sims(r.profile);
        if (s != 0.0) pool.push_back({r.profile, s, r.rating});
    }
    auto closer = [](const Neighbor& a, const Neighbor& b) {
        const double fa = std::abs(a.sim), fb = std::abs(b.sim);
        if (fa != fb) return fa > fb;
        return a.profile < b.profile;
    };
    if (k_neighbors_ > 0 && pool.size() > k_neighbors_) {
        std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k_neighbors_),
                         pool.end(), closer);
        pool.resize(k_neighbors_);
    }
    std::sort(pool.begin(), pool.end(), closer);
    double num = 0.0, den = 0.0;
    const auto& profiles = train_.profiles();
    for (const auto& nb : pool) {
        num += (nb.rating - profiles[static_cast<std::size_t>(nb.profile)].mean_rating) * nb.sim;
        den += std::abs(nb.sim);
    }
    return den > 0.0 ? u.mean_rating + num / den : u.mean_rating;
}

namespace {

std::int32_t profile_position(const TrainingIndex& train, const UserProfile& u) {
    return static_cast<std::int32_t>(&u - train.profiles().data());
}

}  // namespace

double UserCF::predict(UserId user, ItemIndex item) const {
    const UserProfile& u = require(user);
    return predict_with(u, similarities(user), profile_position(train_, u), item);
}

ScoreVector UserCF::scores(UserId user) const {
    const UserProfile& u = require(user);
    const Eigen::VectorXd sims = similarities(user);
    const auto self = profile_position(train_, u);
    ScoreVector out;
    out.tag = ModelTag::UserCF;
    out.candidates = train_.candidates(user);
    out.scores.resize(static_cast<Eigen::Index>(out.candidates.size()));
    for (std::size_t c = 0; c < out.candidates.size(); ++c)
        out.scores(static_cast<Eigen::Index>(c)) = predict_with(u, sims, self, out.candidates[c]);
    return out;
}

// ---------------------------------------------------------------------------
// Item-based CF

ItemCF::ItemCF(const TrainingIndex& train, int threads) : train_(train) {
    const auto n = static_cast<Eigen::Index>(train.item_count());
    sim_ = Eigen::MatrixXd::Zero(n, n);
    const auto& profiles = train.profiles();
    const auto& means = train.item_means();
#ifdef _OPENMP
#pragma omp parallel num_threads(std::max(1, threads))
#else
    (void)threads;
#endif
    {
        Eigen::VectorXd num = Eigen::VectorXd::Zero(n), so = Eigen::VectorXd::Zero(n),
                        si = Eigen::VectorXd::Zero(n);
        Eigen::VectorXi count = Eigen::VectorXi::Zero(n);
        std::vector<ItemIndex> touched;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 8)
#endif
        for (Eigen::Index o = 0; o < n; ++o) {
            for (const auto& r : train.raters(static_cast<ItemIndex>(o))) {
                const double d_o = r.rating - means(o);
                for (const auto& e : profiles[static_cast<std::size_t>(r.profile)].by_item) {
                    if (e.item == o) continue;
                    const double d_i = e.rating - means(e.item);
                    if (count(e.item)++ == 0) touched.push_back(e.item);
                    num(e.item) += d_o * d_i;
                    so(e.item) += d_o * d_o;
                    si(e.item) += d_i * d_i;
                }
            }
            for (auto i : touched) {
                if (count(i) >= 2 && so(i) > 0.0 && si(i) > 0.0)
                    sim_(o, i) = num(i) / (std::sqrt(so(i)) * std::sqrt(si(i)));
                num(i) = so(i) = si(i) = 0.0;
                count(i) = 0;
            }
            touched.clear();
        }
    }
}

double ItemCF::predict(UserId user, ItemIndex item) const {
    const UserProfile* u = train_.profile(user);
    if (!u || u->sequence.empty())
        throw DomainError("user " + std::to_string(user) + " has no training ratings");
    double num = 0.0, den = 0.0;
    for (const auto& e : u->by_item) {
        if (e.item == item) continue;
        const double s = sim_(item, e.item);
        num += s * e.rating;
        den += std::abs(s);
    }
    return den > 0.0 ? num / den : u->mean_rating;
}

ScoreVector ItemCF::scores(UserId user) const {
    ScoreVector out;
    out.tag = ModelTag::ItemCF;
    out.candidates = train_.candidates(user);
    out.scores.resize(static_cast<Eigen::Index>(out.candidates.size()));
    for (std::size_t c = 0; c < out.candidates.size(); ++c)
        out.scores(static_cast<Eigen::Index>(c)) = predict(user, out.candidates[c]);
    return out;
}

// ---------------------------------------------------------------------------
// Popularity

std::vector<ItemIndex> popularity_ranking(const TrainingIndex& train, UserId user) {
    auto items = train.candidates(user);
    const auto& pop = train.popularity();
    std::stable_sort(items.begin(), items.end(),
                     [&](ItemIndex a, ItemIndex b) { return pop(a) > pop(b); });
    return items;
}

RecommendationList popularity_recommend(const TrainingIndex& train, UserId user, std::size_t n) {
    const auto ranking = popularity_ranking(train, user);
    return top_n(std::span<const ItemIndex>(ranking), n);
}

// ---------------------------------------------------------------------------
// Classic order-m Markov chain

std::size_t ClassicMarkov::GramHash::operator()(const std::vector<ItemIndex>& g) const noexcept {
    std::size_t h = g.size();
    for (auto v : g) h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

ClassicMarkov::ClassicMarkov(const TrainingIndex& train, int order)
    : train_(train), order_(order) {
    if (order < 1) throw DomainError("Markov order must be at least 1");
    counts_.resize(static_cast<std::size_t>(order) + 1);
    followers_.resize(static_cast<std::size_t>(order));
    std::vector<ItemIndex> gram;
    for (const auto& p : train.profiles()) {
        const auto len = p.sequence.size();
        for (std::size_t k = 1; k <= static_cast<std::size_t>(order) + 1; ++k) {
            for (std::size_t start = 0; start + k <= len; ++start) {
                gram.clear();
                for (std::size_t j = start; j < start + k; ++j) gram.push_back(p.sequence[j].item);
                ++counts_[k - 1][gram];
            }
        }
    }
    for (std::size_t k = 1; k <= static_cast<std::size_t>(order); ++k) {
        for (const auto& [longer, c] : counts_[k]) {
            std::vector<ItemIndex> prefix(longer.begin(), longer.end() - 1);
            followers_[k - 1][prefix].emplace_back(longer.back(), c);
        }
        for (auto& [prefix, f] : followers_[k - 1]) std::sort(f.begin(), f.end());
    }
}

std::size_t ClassicMarkov::count(std::span<const ItemIndex> gram) const {
    if (gram.empty() || gram.size() > counts_.size()) return 0;
    const auto& table = counts_[gram.size() - 1];
    auto it = table.find(std::vector<ItemIndex>(gram.begin(), gram.end()));
    return it == table.end() ? 0 : it->second;
}

double ClassicMarkov::transition(std::span<const ItemIndex> context, ItemIndex next) const {
    const auto denom = count(context);
    if (denom == 0) return 0.0;
    std::vector<ItemIndex> gram(context.begin(), context.end());
    gram.push_back(next);
    return static_cast<double>(count(gram)) / static_cast<double>(denom);
}

ClassicMarkov::Scored ClassicMarkov::scores(UserId user) const {
    const UserProfile* p = train_.profile(user);
    if (!p || p->sequence.empty())
        throw DomainError("user " + std::to_string(user) + " has no training ratings");
    Scored out;
    out.scores.tag = ModelTag::ClassicMarkov;
    out.scores.candidates = train_.candidates(user);
    out.scores.scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.scores.candidates.size()));

    const auto len = p->sequence.size();
    for (auto k = std::min<std::size_t>(static_cast<std::size_t>(order_), len); k >= 1; --k) {
        std::vector<ItemIndex> context;
        for (std::size_t j = len - k; j < len; ++j) context.push_back(p->sequence[j].item);
        auto it = followers_[k - 1].find(context);
        if (it == followers_[k - 1].end()) continue;
        const double denom = static_cast<double>(counts_[k - 1].at(context));
        bool any = false;
        for (const auto& [next, c] : it->second) {
            auto pos = std::lower_bound(out.scores.candidates.begin(), out.scores.candidates.end(), next);
            if (pos == out.scores.candidates.end() || *pos != next) continue;
            out.scores.scores(pos - out.scores.candidates.begin()) = c / denom;
            any = true;
        }
        if (any) {
            out.order_used = static_cast<int>(k);
            break;
        }
    }
    return out;
}

std::vector<ItemIndex> ClassicMarkov::ranking(UserId user) const {
    const auto scored = scores(user);
    const auto& sv = scored.scores;
    const auto& pop = train_.popularity();
    std::vector<Eigen::Index> pos(sv.candidates.size());
    std::iota(pos.begin(), pos.end(), Eigen::Index{0});
    std::sort(pos.begin(), pos.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (sv.scores(a) != sv.scores(b)) return sv.scores(a) > sv.scores(b);
        const auto ia = sv.candidates[static_cast<std::size_t>(a)];
        const auto ib = sv.candidates[static_cast<std::size_t>(b)];
        if (pop(ia) != pop(ib)) return pop(ia) > pop(ib);
        return ia < ib;
    });
    std::vector<ItemIndex> out;
    out.reserve(pos.size());
    for (auto q : pos) out.push_back(sv.candidates[static_cast<std::size_t>(q)]);
    return out;
}

RecommendationList ClassicMarkov::recommend(UserId user, std::size_t n) const {
    const auto order = ranking(user);
    return top_n(std::span<const ItemIndex>(order), n);
}

}  // namespace statemix
