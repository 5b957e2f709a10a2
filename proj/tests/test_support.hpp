#pragma once

#include <ostream>

#include "qcs/extended.hpp"

namespace qcs {

inline void PrintTo(const Extended<double>& e, std::ostream* os) {
  if (e.is_neg_inf()) {
    *os << "-inf";
  } else if (e.is_pos_inf()) {
    *os << "+inf";
  } else {
    *os << e.value();
  }
}

}  // namespace qcs
