#ifndef AITF_CSV_HPP
#define AITF_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "aitf/simnet.hpp"

namespace aitf {

// Fixed schema: times in seconds with microsecond precision, bandwidths in
// integer bits/s. Locale-independent formatting, byte-stable per run.
inline constexpr const char* kTimeseriesHeader =
    "t_s,victim,good_bps,attack_bps,vgw_filters,shadow_entries,"
    "requests_cum,escalations_cum";

void write_timeseries(std::ostream& out,
                      const std::vector<GoodputSample>& samples);
void write_summary(std::ostream& out,
                   const std::vector<VictimSummary>& summaries);

std::string timeseries_to_string(const std::vector<GoodputSample>& samples);

// Inverse of write_timeseries; throws std::runtime_error on malformed rows.
std::vector<GoodputSample> parse_timeseries(std::istream& in);

}  // namespace aitf

#endif  // AITF_CSV_HPP
