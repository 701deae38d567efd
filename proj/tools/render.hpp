#pragma once

// Conversion of library results to JSON records and text reports.

#include "selfsim/criteria.hpp"
#include "selfsim/detail.hpp"
#include "selfsim/entropy.hpp"
#include "selfsim/separation.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace selfsim::cli {

using json = nlohmann::ordered_json;

//! 12 significant digits.
std::string fmt(double x);
//! "value (width w)" for a certified enclosure.
std::string fmt(const Interval& x);

json to_json(const Interval& x);
json to_json(const Estimate& e);
json to_json(const EntropyBound& b);
json to_json(const SeparationBound& b);
json to_json(const FreenessCertificate& c);
json to_json(const CriterionReport& r);
json to_json(const ContractingAverageReport& r);
json to_json(const DimensionEstimate& r);
json to_json(const BernoulliReport& r);
json to_json(const InhomReport& r);
json to_json(const PsdPartition& p);

std::string to_text(const CriterionReport& r);
std::string to_text(const ContractingAverageReport& r);
std::string to_text(const DimensionEstimate& r);
std::string to_text(const BernoulliReport& r);
std::string to_text(const InhomReport& r);
std::string to_text(const FreenessCertificate& c);

} // namespace selfsim::cli
