/**
 * Copyright (c) 2026 by Contributors
 * @file date.cpp
 */
#include "stgat/date.hpp"

#include <chrono>
#include <cstdio>

#include "stgat/common.hpp"

namespace stgat {

namespace chr = std::chrono;

Date Date::parse(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(iso.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 ||
      iso.size() != 10) {
    throw DataError("malformed date '" + iso + "', expected YYYY-MM-DD");
  }
  chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                          chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date '" + iso + "'");
  }
  return Date(static_cast<int>(chr::sys_days{ymd}.time_since_epoch().count()));
}

std::string Date::to_string() const {
  chr::sys_days sd{chr::days{days_}};
  chr::year_month_day ymd{sd};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace stgat
