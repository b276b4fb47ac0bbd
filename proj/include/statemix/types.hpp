#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace statemix {

using UserId = std::int64_t;
using ItemId = std::int64_t;

/// Dense position of an item in an ItemTable. Ascending index order equals
/// ascending ItemId order, so index comparisons double as id tie-breaks.
using ItemIndex = std::int32_t;

struct RatingEvent {
    UserId user = 0;
    ItemId item = 0;
    int rating = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

enum class Polarity : std::uint8_t { Dislike = 0, Like = 1 };

/// Polarity state of one item, packed as 2 * item + polarity bit.
struct StateId {
    std::int32_t value = 0;

    constexpr StateId() = default;
    constexpr explicit StateId(std::int32_t v) : value(v) {}
    constexpr StateId(ItemIndex item, Polarity p)
        : value(2 * item + static_cast<std::int32_t>(p)) {}

    constexpr ItemIndex item() const { return value >> 1; }
    constexpr Polarity polarity() const { return static_cast<Polarity>(value & 1); }

    friend constexpr auto operator<=>(StateId, StateId) = default;
};

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const char* to_string(Polarity p) { return p == Polarity::Like ? "L" : "D"; }

}  // namespace statemix
