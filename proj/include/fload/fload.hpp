#pragma once

// Umbrella header for the functional-load toolkit.

#include "fload/analysis.hpp"
#include "fload/contrast.hpp"
#include "fload/corpus.hpp"
#include "fload/error.hpp"
#include "fload/infotheory.hpp"
#include "fload/schema.hpp"
#include "fload/value.hpp"

namespace fload {
inline constexpr const char* kVersion = "0.1.0";
}
