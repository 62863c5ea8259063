#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "cjscope/jsmetrics.hpp"

// The three script classes and the 28-row feature fixture shipped with the
// library. Labels are "<class>/<name>", e.g. "benign/The Boat".

namespace cjscope::dataset {

enum class ScriptClass { Benign = 0, Malicious = 1, Cryptojacking = 2 };

inline constexpr std::array<ScriptClass, 3> all_classes = {
    ScriptClass::Benign, ScriptClass::Malicious, ScriptClass::Cryptojacking};

std::string_view to_string(ScriptClass c);

/// Class from a label's prefix ("cryptojacking", "cj", "malicious",
/// "benign"; case-insensitive). Throws std::invalid_argument otherwise.
ScriptClass class_of(std::string_view label);

std::vector<jsmetrics::LabeledVector> feature_fixture();
std::string_view feature_fixture_csv();

std::vector<jsmetrics::FeatureVector> rows_of(const std::vector<jsmetrics::LabeledVector>& rows,
                                              ScriptClass c);

}  // namespace cjscope::dataset
