/**
 * Copyright (c) 2026 by Contributors
 * @file date.hpp
 * @brief Calendar day as a count of days since the Unix epoch.
 */
#ifndef STGAT_DATE_HPP_
#define STGAT_DATE_HPP_

#include <compare>
#include <string>

namespace stgat {

class Date {
 public:
  Date() : days_(0) {}
  explicit Date(int days_since_epoch) : days_(days_since_epoch) {}

  /// Parses "YYYY-MM-DD"; throws DataError on malformed or invalid dates.
  static Date parse(const std::string& iso);

  std::string to_string() const;

  int days() const { return days_; }

  Date operator+(int d) const { return Date(days_ + d); }
  Date operator-(int d) const { return Date(days_ - d); }
  int operator-(Date other) const { return days_ - other.days_; }
  Date& operator+=(int d) {
    days_ += d;
    return *this;
  }
  auto operator<=>(const Date&) const = default;

 private:
  int days_;
};

}  // namespace stgat

#endif  // STGAT_DATE_HPP_
