#pragma once

#include "pmx/classify.hpp"
#include "pmx/diagnostic.hpp"

namespace pmx {

// Both take an ANF, lambda-lifted backend program.
Diagnostics checkFuthark(const ExprPtr& eFut);
Diagnostics checkCuda(const ExprPtr& eCu);

// Conjunction of both checks over the split's programs.
Diagnostics checkWellFormed(const BackendSplit& split);

}  // namespace pmx
