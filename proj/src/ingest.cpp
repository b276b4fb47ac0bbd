#include "statemix/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string_view>

namespace statemix {

namespace {

template <typename T>
bool parse_int(std::string_view s, T& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line, std::string_view sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(line.substr(start));
            return parts;
        }
        parts.push_back(line.substr(start, pos - start));
        start = pos + sep.size();
    }
}

bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

bool valid_event(const RatingEvent& e) {
    return e.rating >= 1 && e.rating <= 5 && e.timestamp >= 0;
}

}  // namespace

Polarity binarize(int rating, double threshold) {
    if (rating < 1 || rating > 5)
        throw DomainError("rating " + std::to_string(rating) + " outside [1,5]");
    return rating > threshold ? Polarity::Like : Polarity::Dislike;
}

InteractionLog::InteractionLog(std::vector<RatingEvent> events, std::size_t skipped_lines)
    : events_(std::move(events)), skipped_lines_(skipped_lines) {
    for (std::size_t i = 0; i < events_.size(); ++i) {
        user_events_[events_[i].user].push_back(i);
        ++item_counts_[events_[i].item];
    }
    for (auto& [user, idx] : user_events_) {
        std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
            return events_[a].timestamp < events_[b].timestamp;
        });
    }
}

std::size_t InteractionLog::count_for(UserId user) const {
    auto it = user_events_.find(user);
    return it == user_events_.end() ? 0 : it->second.size();
}

InteractionLog parse_movielens(std::istream& in) {
    std::vector<RatingEvent> events;
    std::size_t skipped = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        auto f = split(line, "::");
        RatingEvent e;
        if (f.size() != 4 || !parse_int(f[0], e.user) || !parse_int(f[1], e.item) ||
            !parse_int(f[2], e.rating) || !parse_int(f[3], e.timestamp) || !valid_event(e)) {
            ++skipped;
            continue;
        }
        events.push_back(e);
    }
    if (in.bad()) throw ParseError("read error in MovieLens stream");
    return InteractionLog(std::move(events), skipped);
}

InteractionLog load_movielens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_movielens(in);
}

std::int64_t epoch_days(const std::string& ymd) {
    auto f = split(ymd, "-");
    int y = 0;
    unsigned m = 0, d = 0;
    if (f.size() != 3 || !parse_int(f[0], y) || !parse_int(f[1], m) || !parse_int(f[2], d))
        throw ParseError("bad date '" + ymd + "'");
    std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{m},
                                     std::chrono::day{d}};
    if (!date.ok()) throw ParseError("bad date '" + ymd + "'");
    return std::chrono::sys_days{date}.time_since_epoch().count();
}

NetflixParse parse_netflix(std::span<const NetflixStream> streams) {
    struct Block {
        ItemId movie;
        std::size_t order;
        std::vector<RatingEvent> events;
    };
    std::vector<Block> blocks;
    NetflixParse result;
    std::size_t skipped = 0;

    for (const auto& stream : streams) {
        std::vector<Block> local;
        std::size_t local_skipped = 0;
        bool rejected = false;
        std::string line;
        while (std::getline(*stream.in, line)) {
            if (blank(line)) continue;
            std::string_view sv = line;
            while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) sv.remove_suffix(1);
            if (!sv.empty() && sv.back() == ':') {
                ItemId movie = 0;
                if (!parse_int(sv.substr(0, sv.size() - 1), movie)) {
                    if (local.empty()) {
                        rejected = true;
                        break;
                    }
                    ++local_skipped;
                    continue;
                }
                local.push_back({movie, blocks.size() + local.size(), {}});
                continue;
            }
            if (local.empty()) {
                rejected = true;
                break;
            }
            auto f = split(sv, ",");
            RatingEvent e;
            e.item = local.back().movie;
            if (f.size() != 3 || !parse_int(f[0], e.user) || !parse_int(f[1], e.rating)) {
                ++local_skipped;
                continue;
            }
            try {
                e.timestamp = epoch_days(std::string(f[2]));
            } catch (const ParseError&) {
                ++local_skipped;
                continue;
            }
            if (!valid_event(e)) {
                ++local_skipped;
                continue;
            }
            local.back().events.push_back(e);
        }
        if (stream.in->bad()) rejected = true;
        if (rejected || local.empty()) {
            result.rejected_streams.push_back(stream.name);
            continue;
        }
        skipped += local_skipped;
        for (auto& b : local) blocks.push_back(std::move(b));
    }

    // Movie-ascending concatenation: the per-user stable time sort then
    // orders same-day ratings by item id.
    std::stable_sort(blocks.begin(), blocks.end(),
                     [](const Block& a, const Block& b) { return a.movie < b.movie; });
    std::vector<RatingEvent> events;
    for (auto& b : blocks) events.insert(events.end(), b.events.begin(), b.events.end());
    result.log = InteractionLog(std::move(events), skipped);
    return result;
}

NetflixParse load_netflix(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file()) files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
    } else if (fs::exists(path)) {
        files.push_back(path);
    } else {
        throw ParseError("cannot open " + path);
    }
    std::vector<std::unique_ptr<std::ifstream>> handles;
    std::vector<NetflixStream> streams;
    for (const auto& f : files) {
        handles.push_back(std::make_unique<std::ifstream>(f));
        if (!*handles.back()) throw ParseError("cannot open " + f);
        streams.push_back({f, handles.back().get()});
    }
    return parse_netflix(streams);
}

void write_log_csv(const InteractionLog& log, std::ostream& out) {
    out << "user,item,rating,timestamp\n";
    for (const auto& e : log.events())
        out << e.user << ',' << e.item << ',' << e.rating << ',' << e.timestamp << '\n';
}

InteractionLog read_log_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    if (line.rfind("user,item,rating,timestamp", 0) != 0)
        throw ParseError("missing log CSV header");
    std::vector<RatingEvent> events;
    std::size_t skipped = 0;
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        auto f = split(line, ",");
        RatingEvent e;
        if (f.size() != 4 || !parse_int(f[0], e.user) || !parse_int(f[1], e.item) ||
            !parse_int(f[2], e.rating) || !parse_int(f[3], e.timestamp) || !valid_event(e)) {
            ++skipped;
            continue;
        }
        events.push_back(e);
    }
    return InteractionLog(std::move(events), skipped);
}

SplitDataset chronological_split(const InteractionLog& log, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DomainError("train fraction must lie in (0,1)");
    if (log.empty()) throw DomainError("cannot split an empty log");

    const auto& events = log.events();
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return events[a].timestamp < events[b].timestamp;
    });

    auto cut = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(events.size())));
    std::vector<RatingEvent> train, test;
    train.reserve(cut);
    test.reserve(events.size() - cut);
    for (std::size_t k = 0; k < order.size(); ++k)
        (k < cut ? train : test).push_back(events[order[k]]);

    SplitDataset split;
    split.train = InteractionLog(std::move(train));
    split.test = InteractionLog(std::move(test));
    return split;
}

std::set<UserId> select_test_users(const SplitDataset& split, std::size_t list_size) {
    std::set<UserId> users;
    for (const auto& [user, idx] : split.test.user_events())
        if (idx.size() > list_size && split.train.count_for(user) >= 1) users.insert(user);
    return users;
}

}  // namespace statemix
