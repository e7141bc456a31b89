#pragma once

#include <string>
#include <string_view>

#include "symreg/dataset.hpp"

namespace symreg {

/// Header `x1,...,xm,y`, then one row of decimal floats per line. Any defect
/// throws DataError naming the line and column.
Dataset parse_csv(std::string_view text, const std::string& source = "<input>");
Dataset read_csv(const std::string& path);

}  // namespace symreg
