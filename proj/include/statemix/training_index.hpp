#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "statemix/ingest.hpp"
#include "statemix/types.hpp"

namespace statemix {

/// Sorted table of item ids; the dense ItemIndex is the position in it.
class ItemTable {
public:
    ItemTable() = default;
    explicit ItemTable(std::vector<ItemId> ids);

    std::size_t size() const { return ids_.size(); }
    ItemId id(ItemIndex idx) const { return ids_[static_cast<std::size_t>(idx)]; }
    std::optional<ItemIndex> find(ItemId id) const;
    const std::vector<ItemId>& ids() const { return ids_; }

    friend bool operator==(const ItemTable&, const ItemTable&) = default;

private:
    std::vector<ItemId> ids_;
};

/// One deduplicated training rating of a user.
struct ProfileEntry {
    ItemIndex item = 0;
    int rating = 0;
    Polarity polarity = Polarity::Dislike;
};

/// A user's training history in time order, one entry per distinct item.
struct UserProfile {
    UserId user = 0;
    std::vector<ProfileEntry> sequence;
    double mean_rating = 0.0;

    /// sequence sorted by item index, for co-rating merges
    std::vector<ProfileEntry> by_item;

    bool rated(ItemIndex item) const;
    std::optional<int> rating_of(ItemIndex item) const;
};

struct Rater {
    std::int32_t profile = 0;  // index into TrainingIndex::profiles()
    int rating = 0;
};

/// Read-only view of a training log shared by every model.
///
/// Duplicate (user, item) ratings keep only the latest event; its position in
/// the user's sequence is that of the latest event.
class TrainingIndex {
public:
    explicit TrainingIndex(const InteractionLog& train, double like_threshold = kDefaultLikeThreshold);

    const ItemTable& items() const { return items_; }
    std::size_t item_count() const { return items_.size(); }
    std::size_t state_count() const { return 2 * items_.size(); }

    /// Profiles ordered by ascending user id.
    const std::vector<UserProfile>& profiles() const { return profiles_; }
    const UserProfile* profile(UserId user) const;

    /// Distinct training users per item.
    const Eigen::VectorXi& popularity() const { return popularity_; }
    const std::vector<Rater>& raters(ItemIndex item) const {
        return raters_[static_cast<std::size_t>(item)];
    }
    /// Mean training rating of each item (0 for items without ratings).
    const Eigen::VectorXd& item_means() const { return item_means_; }

    double like_threshold() const { return like_threshold_; }

    /// Training items the user has not rated, ascending.
    std::vector<ItemIndex> candidates(UserId user) const;

private:
    ItemTable items_;
    std::vector<UserProfile> profiles_;
    std::map<UserId, std::size_t> profile_of_;
    Eigen::VectorXi popularity_;
    Eigen::VectorXd item_means_;
    std::vector<std::vector<Rater>> raters_;
    double like_threshold_;
};

}  // namespace statemix
