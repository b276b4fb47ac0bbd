#include "statemix/training_index.hpp"

#include <algorithm>
#include <unordered_map>

namespace statemix {

ItemTable::ItemTable(std::vector<ItemId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

std::optional<ItemIndex> ItemTable::find(ItemId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<ItemIndex>(it - ids_.begin());
}

namespace {

const ProfileEntry* find_entry(const std::vector<ProfileEntry>& by_item, ItemIndex item) {
    auto it = std::lower_bound(by_item.begin(), by_item.end(), item,
                               [](const ProfileEntry& e, ItemIndex i) { return e.item < i; });
    return it != by_item.end() && it->item == item ? &*it : nullptr;
}

}  // namespace

bool UserProfile::rated(ItemIndex item) const { return find_entry(by_item, item) != nullptr; }

std::optional<int> UserProfile::rating_of(ItemIndex item) const {
    const auto* e = find_entry(by_item, item);
    if (!e) return std::nullopt;
    return e->rating;
}

TrainingIndex::TrainingIndex(const InteractionLog& train, double like_threshold)
    : like_threshold_(like_threshold) {
    std::vector<ItemId> ids;
    ids.reserve(train.item_count());
    for (const auto& [item, count] : train.item_counts()) ids.push_back(item);
    items_ = ItemTable(std::move(ids));

    const auto& events = train.events();
    profiles_.reserve(train.user_count());
    std::unordered_map<ItemIndex, std::size_t> last_seen;
    for (const auto& [user, idx] : train.user_events()) {
        UserProfile p;
        p.user = user;
        last_seen.clear();
        for (std::size_t k = 0; k < idx.size(); ++k)
            last_seen[*items_.find(events[idx[k]].item)] = k;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const auto& e = events[idx[k]];
            ItemIndex item = *items_.find(e.item);
            if (last_seen[item] != k) continue;
            p.sequence.push_back({item, e.rating, binarize(e.rating, like_threshold)});
        }
        double sum = 0.0;
        for (const auto& entry : p.sequence) sum += entry.rating;
        p.mean_rating = sum / static_cast<double>(p.sequence.size());
        p.by_item = p.sequence;
        std::sort(p.by_item.begin(), p.by_item.end(),
                  [](const ProfileEntry& a, const ProfileEntry& b) { return a.item < b.item; });
        profile_of_[user] = profiles_.size();
        profiles_.push_back(std::move(p));
    }

    const auto n_items = static_cast<Eigen::Index>(items_.size());
    popularity_ = Eigen::VectorXi::Zero(n_items);
    item_means_ = Eigen::VectorXd::Zero(n_items);
    raters_.assign(items_.size(), {});
    for (std::size_t pi = 0; pi < profiles_.size(); ++pi) {
        for (const auto& entry : profiles_[pi].sequence) {
            popularity_(entry.item) += 1;
            item_means_(entry.item) += entry.rating;
            raters_[static_cast<std::size_t>(entry.item)].push_back(
                {static_cast<std::int32_t>(pi), entry.rating});
        }
    }
    for (Eigen::Index i = 0; i < n_items; ++i)
        if (popularity_(i) > 0) item_means_(i) /= popularity_(i);
}

const UserProfile* TrainingIndex::profile(UserId user) const {
    auto it = profile_of_.find(user);
    return it == profile_of_.end() ? nullptr : &profiles_[it->second];
}

std::vector<ItemIndex> TrainingIndex::candidates(UserId user) const {
    const UserProfile* p = profile(user);
    std::vector<ItemIndex> out;
    out.reserve(items_.size());
    std::size_t k = 0;
    for (ItemIndex i = 0; i < static_cast<ItemIndex>(items_.size()); ++i) {
        if (p && k < p->by_item.size() && p->by_item[k].item == i) {
            ++k;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

}  // namespace statemix
