#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "statemix/types.hpp"

namespace statemix {

/// Ratings above this are Like, below are Dislike.
inline constexpr double kDefaultLikeThreshold = 2.5;

Polarity binarize(int rating, double threshold = kDefaultLikeThreshold);

/// Immutable rating log with a per-user chronological index.
///
/// `events` keeps the order the log was built from; `user_events` holds, for
/// each user, indices into `events` sorted by timestamp (stable, so equal
/// timestamps keep their input order).
class InteractionLog {
public:
    InteractionLog() = default;
    explicit InteractionLog(std::vector<RatingEvent> events, std::size_t skipped_lines = 0);

    const std::vector<RatingEvent>& events() const { return events_; }
    const std::map<UserId, std::vector<std::size_t>>& user_events() const { return user_events_; }
    const std::map<ItemId, std::size_t>& item_counts() const { return item_counts_; }

    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    std::size_t user_count() const { return user_events_.size(); }
    std::size_t item_count() const { return item_counts_.size(); }

    /// Number of user's events, 0 for unknown users.
    std::size_t count_for(UserId user) const;

    /// Lines dropped by the parser as malformed.
    std::size_t skipped_lines() const { return skipped_lines_; }

private:
    std::vector<RatingEvent> events_;
    std::map<UserId, std::vector<std::size_t>> user_events_;
    std::map<ItemId, std::size_t> item_counts_;
    std::size_t skipped_lines_ = 0;
};

/// `UserID::MovieID::Rating::Timestamp` per line.
InteractionLog parse_movielens(std::istream& in);
InteractionLog load_movielens(const std::string& path);

struct NetflixStream {
    std::string name;
    std::istream* in = nullptr;
};

/// Result of merging Netflix per-movie streams. Streams without a leading
/// `<MovieID>:` header are rejected whole and listed in `rejected_streams`.
struct NetflixParse {
    InteractionLog log;
    std::vector<std::string> rejected_streams;
};

NetflixParse parse_netflix(std::span<const NetflixStream> streams);

/// Accepts a single file or a directory of per-movie files.
NetflixParse load_netflix(const std::string& path);

/// Days since 1970-01-01 for a `YYYY-MM-DD` date; throws ParseError.
std::int64_t epoch_days(const std::string& ymd);

/// CSV `user,item,rating,timestamp` with header row.
void write_log_csv(const InteractionLog& log, std::ostream& out);
InteractionLog read_log_csv(std::istream& in);

struct SplitDataset {
    InteractionLog train;
    InteractionLog test;
    std::set<UserId> test_users;
};

/// Global chronological split: all events are stably sorted by timestamp and
/// the first floor(train_fraction * total) go to train.
SplitDataset chronological_split(const InteractionLog& log, double train_fraction = 0.9);

/// Users with at least one training rating and strictly more than
/// `list_size` test ratings.
std::set<UserId> select_test_users(const SplitDataset& split, std::size_t list_size);

}  // namespace statemix
