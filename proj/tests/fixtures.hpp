#pragma once

// Shared test fixtures plus a naive reference evaluation of the polarity
// models. The reference works from raw events with plain loops and never
// touches TrainingIndex or StateGraph.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "statemix/ingest.hpp"
#include "statemix/types.hpp"

namespace fixtures {

using statemix::ItemId;
using statemix::RatingEvent;
using statemix::UserId;

inline std::vector<RatingEvent> random_events(std::mt19937_64& rng, int max_users, int max_items,
                                              int max_events) {
    std::uniform_int_distribution<int> users(1, max_users), items(1, max_items), rating(1, 5),
        ts(0, 30), count(1, max_events);
    std::vector<RatingEvent> ev;
    const int n = count(rng);
    for (int k = 0; k < n; ++k)
        ev.push_back({static_cast<UserId>(users(rng)), static_cast<ItemId>(10 * items(rng)),
                      rating(rng), static_cast<std::int64_t>(ts(rng))});
    return ev;
}

/// Each user's items in time order after keeping only the latest rating of
/// an item; polarity is rating > 2.5.
struct NaiveEntry {
    ItemId item;
    int rating;
    bool like;
};

inline std::map<UserId, std::vector<NaiveEntry>> naive_sequences(const std::vector<RatingEvent>& ev) {
    std::map<UserId, std::vector<std::pair<RatingEvent, std::size_t>>> per_user;
    for (std::size_t k = 0; k < ev.size(); ++k) per_user[ev[k].user].push_back({ev[k], k});
    std::map<UserId, std::vector<NaiveEntry>> out;
    for (auto& [u, list] : per_user) {
        // insertion sort by (timestamp, input position)
        for (std::size_t i = 1; i < list.size(); ++i)
            for (std::size_t j = i; j > 0; --j) {
                const auto& a = list[j - 1];
                const auto& b = list[j];
                if (a.first.timestamp > b.first.timestamp ||
                    (a.first.timestamp == b.first.timestamp && a.second > b.second))
                    std::swap(list[j - 1], list[j]);
            }
        std::vector<NaiveEntry> seq;
        for (std::size_t i = 0; i < list.size(); ++i) {
            bool later = false;
            for (std::size_t j = i + 1; j < list.size(); ++j)
                if (list[j].first.item == list[i].first.item) later = true;
            if (!later)
                seq.push_back({list[i].first.item, list[i].first.rating, list[i].first.rating > 2.5});
        }
        out[u] = seq;
    }
    return out;
}

struct NaiveState {
    ItemId item;
    bool like;
    bool operator==(const NaiveState&) const = default;
};

/// Directed state pairs contributed by every user, AT (consecutive) or AC
/// (all ordered pairs of distinct items).
inline std::vector<std::pair<NaiveState, NaiveState>> naive_pairs(
    const std::map<UserId, std::vector<NaiveEntry>>& seqs, bool co_occurrence) {
    std::vector<std::pair<NaiveState, NaiveState>> pairs;
    for (const auto& [u, seq] : seqs) {
        for (std::size_t i = 0; i < seq.size(); ++i)
            for (std::size_t j = 0; j < seq.size(); ++j) {
                if (i == j) continue;
                if (!co_occurrence && j != i + 1) continue;
                pairs.push_back({{seq[i].item, seq[i].like}, {seq[j].item, seq[j].like}});
            }
    }
    return pairs;
}

inline double naive_forward(const std::vector<std::pair<NaiveState, NaiveState>>& pairs,
                            NaiveState from, NaiveState to) {
    double out = 0, w = 0;
    for (const auto& [a, b] : pairs) {
        if (a == from) {
            out += 1;
            if (b == to) w += 1;
        }
    }
    return out > 0 ? w / out : 0.0;
}

inline double naive_backward(const std::vector<std::pair<NaiveState, NaiveState>>& pairs,
                             NaiveState from, NaiveState to) {
    double in = 0, w = 0;
    for (const auto& [a, b] : pairs) {
        if (b == to) {
            in += 1;
            if (a == from) w += 1;
        }
    }
    return in > 0 ? w / in : 0.0;
}

/// Polarity-difference score of `item` for `user`, forward (PM) or
/// backward (SM), uniform sub-state weights.
inline double naive_score(const std::map<UserId, std::vector<NaiveEntry>>& seqs,
                          const std::vector<std::pair<NaiveState, NaiveState>>& pairs, UserId user,
                          ItemId item, bool backward) {
    const auto& seq = seqs.at(user);
    double like = 0, dislike = 0;
    for (const auto& e : seq) {
        NaiveState s{e.item, e.like};
        const double w = 1.0 / static_cast<double>(seq.size());
        if (backward) {
            like += w * naive_backward(pairs, s, {item, true});
            dislike += w * naive_backward(pairs, s, {item, false});
        } else {
            like += w * naive_forward(pairs, s, {item, true});
            dislike += w * naive_forward(pairs, s, {item, false});
        }
    }
    return like - dislike;
}

/// Users whose item sequence contains `gram` contiguously.
inline std::size_t naive_gram_count(const std::map<UserId, std::vector<NaiveEntry>>& seqs,
                                    const std::vector<ItemId>& gram) {
    std::size_t users = 0;
    for (const auto& [u, seq] : seqs) {
        bool found = false;
        for (std::size_t s = 0; s + gram.size() <= seq.size() && !found; ++s) {
            bool match = true;
            for (std::size_t k = 0; k < gram.size(); ++k)
                if (seq[s + k].item != gram[k]) match = false;
            found = match;
        }
        if (found) ++users;
    }
    return users;
}

}  // namespace fixtures
