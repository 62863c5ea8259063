#include "cjscope/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include "embedded.hpp"

namespace cjscope::dataset {

std::string_view to_string(ScriptClass c) {
    switch (c) {
        case ScriptClass::Benign: return "benign";
        case ScriptClass::Malicious: return "malicious";
        case ScriptClass::Cryptojacking: return "cryptojacking";
    }
    return "?";
}

ScriptClass class_of(std::string_view label) {
    std::string prefix(label.substr(0, label.find('/')));
    std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (prefix == "cryptojacking" || prefix == "cj") return ScriptClass::Cryptojacking;
    if (prefix == "malicious") return ScriptClass::Malicious;
    if (prefix == "benign") return ScriptClass::Benign;
    throw std::invalid_argument("label '" + std::string(label) + "' does not name a class");
}

std::string_view feature_fixture_csv() { return embedded::lookup("feature_fixture.csv"); }

std::vector<jsmetrics::LabeledVector> feature_fixture() {
    return jsmetrics::import_feature_matrix(feature_fixture_csv());
}

std::vector<jsmetrics::FeatureVector> rows_of(const std::vector<jsmetrics::LabeledVector>& rows,
                                              ScriptClass c) {
    std::vector<jsmetrics::FeatureVector> out;
    for (const auto& [label, f] : rows)
        if (class_of(label) == c) out.push_back(f);
    return out;
}

}  // namespace cjscope::dataset
