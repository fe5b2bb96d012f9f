#pragma once

// Independent reference implementations for tests. Nothing here calls the
// library's discovery or distance code.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geomine/eventlog.hpp"

namespace oracle {

/// Central angle from the 3-D unit vectors, atan2(|a x b|, a . b).
double great_circle_km(double lat1, double lon1, double lat2, double lon2);

std::string label_of(const geomine::Event& e, const std::string& dim);

/// Label sequence of one trace, optionally merging runs.
std::vector<std::string> labels(const geomine::Trace& t, const std::string& dim, bool collapse);

using EdgeCounts = std::map<std::pair<std::string, std::string>, std::size_t>;

/// Adjacent-pair counts over all traces.
EdgeCounts edge_counts(const geomine::EventLog& log, const std::string& dim, bool collapse);
/// Distinct cases per adjacent pair.
EdgeCounts edge_case_counts(const geomine::EventLog& log, const std::string& dim, bool collapse);
std::map<std::string, std::size_t> visit_counts(const geomine::EventLog& log, const std::string& dim, bool collapse);

/// Case ids whose first label is `source` and last is `destination`.
std::multiset<std::string> endpoint_cases(const geomine::EventLog& log, const std::string& dim,
                                          const std::string& source, const std::string& destination);

/// Collapsed path -> case count.
std::map<std::vector<std::string>, std::size_t> variant_counts(const geomine::EventLog& log, const std::string& dim);

/// Random log: up to max_cases cases with 1..max_events events each, small
/// label alphabets, some missing locations, occasional equal timestamps.
geomine::EventLog random_log(std::mt19937_64& rng, std::size_t max_cases, std::size_t max_events);

} // namespace oracle
