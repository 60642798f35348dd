#pragma once

// Small unsigned decimal-string arithmetic used by the arithmetic tasks'
// step templates. Operands are digit strings, most significant digit first.

#include <algorithm>
#include <string>
#include <string_view>

#include "cotsup/core.hpp"

namespace cotsup::decimal {

inline bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string strip_leading_zeros(std::string_view s) {
  const auto first = s.find_first_not_of('0');
  if (first == std::string_view::npos) return "0";
  return std::string(s.substr(first));
}

inline std::string add(std::string_view a, std::string_view b) {
  std::string out;
  int carry = 0;
  auto ia = a.rbegin();
  auto ib = b.rbegin();
  while (ia != a.rend() || ib != b.rend() || carry != 0) {
    int sum = carry;
    if (ia != a.rend()) sum += *ia++ - '0';
    if (ib != b.rend()) sum += *ib++ - '0';
    out.push_back(static_cast<char>('0' + sum % 10));
    carry = sum / 10;
  }
  std::reverse(out.begin(), out.end());
  return strip_leading_zeros(out);
}

inline std::string multiply_digit(std::string_view a, int digit) {
  if (digit < 0 || digit > 9) throw Error(ErrorCode::InvalidParams, "digit out of range");
  std::string out;
  int carry = 0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    const int prod = (*it - '0') * digit + carry;
    out.push_back(static_cast<char>('0' + prod % 10));
    carry = prod / 10;
  }
  while (carry != 0) {
    out.push_back(static_cast<char>('0' + carry % 10));
    carry /= 10;
  }
  std::reverse(out.begin(), out.end());
  return strip_leading_zeros(out);
}

inline std::string shift(std::string_view a, int places) {
  std::string out = strip_leading_zeros(a);
  if (out == "0") return out;
  out.append(static_cast<std::size_t>(places), '0');
  return out;
}

}  // namespace cotsup::decimal
