#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace touchloc {

/// Outcome of a guarded move: the time of first contact, or no contact.
///
/// NoContact is stored as +infinity so that a contact-time table is a dense
/// array of doubles. Use the named accessors rather than comparing raw values.
class Observation {
 public:
  constexpr Observation() = default;

  static constexpr Observation contact(double time_s) { return Observation(time_s); }
  static constexpr Observation no_contact() {
    return Observation(std::numeric_limits<double>::infinity());
  }
  /// Interprets +inf as NoContact.
  static constexpr Observation from_raw(double raw) { return Observation(raw); }

  bool is_contact() const { return std::isfinite(time_); }
  bool is_no_contact() const { return !is_contact(); }
  double time() const { return time_; }
  double raw() const { return time_; }

  friend bool operator==(const Observation&, const Observation&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Observation& o) {
    if (o.is_no_contact()) return os << "NoContact";
    return os << "Contact(" << o.time_ << ")";
  }

 private:
  constexpr explicit Observation(double t) : time_(t) {}
  double time_ = std::numeric_limits<double>::infinity();
};

inline constexpr double kNoContact = std::numeric_limits<double>::infinity();

}  // namespace touchloc
