#include "aitf/csv.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aitf {

namespace {

long long to_bps(double v) { return std::llround(v); }

}  // namespace

void write_timeseries(std::ostream& out,
                      const std::vector<GoodputSample>& samples) {
  out << kTimeseriesHeader << '\n';
  char buf[256];
  for (const GoodputSample& s : samples) {
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%u,%lld,%lld,%zu,%zu,%" PRIu64 ",%" PRIu64 "\n", s.t,
                  s.victim, to_bps(s.good_bps), to_bps(s.attack_bps),
                  s.vgw_filters, s.shadow_entries, s.requests_cum,
                  s.escalations_cum);
    out << buf;
  }
}

std::string timeseries_to_string(const std::vector<GoodputSample>& samples) {
  std::ostringstream os;
  write_timeseries(os, samples);
  return os.str();
}

void write_summary(std::ostream& out,
                   const std::vector<VictimSummary>& summaries) {
  out << "victim,flows_requested,flows_unresolved,frt_mean_s,frt_max_s,"
         "peak_vgw_filters,peak_shadow_entries,requests_sent,escalations,"
         "offered_attack_bits,delivered_attack_bits,filter_dropped_bits,"
         "congestion_dropped_bits,delivered_good_bits\n";
  char buf[512];
  for (const VictimSummary& s : summaries) {
    std::snprintf(buf, sizeof(buf),
                  "%u,%zu,%zu,%.6f,%.6f,%zu,%zu,%" PRIu64 ",%" PRIu64
                  ",%.0f,%.0f,%.0f,%.0f,%.0f\n",
                  s.victim, s.flows_requested, s.flows_unresolved,
                  s.frt_mean_s, s.frt_max_s, s.peak_vgw_filters,
                  s.peak_shadow_entries, s.requests_sent, s.escalations,
                  s.offered_attack_bits, s.delivered_attack_bits,
                  s.filter_dropped_bits, s.congestion_dropped_bits,
                  s.delivered_good_bits);
    out << buf;
  }
}

std::vector<GoodputSample> parse_timeseries(std::istream& in) {
  std::vector<GoodputSample> samples;
  std::string line;
  if (!std::getline(in, line) || line != kTimeseriesHeader)
    throw std::runtime_error("timeseries: bad or missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    GoodputSample s;
    unsigned victim = 0;
    long long good = 0, attack = 0;
    std::size_t filters = 0, shadows = 0;
    std::uint64_t req = 0, esc = 0;
    if (std::sscanf(line.c_str(),
                    "%lf,%u,%lld,%lld,%zu,%zu,%" SCNu64 ",%" SCNu64, &s.t,
                    &victim, &good, &attack, &filters, &shadows, &req,
                    &esc) != 8)
      throw std::runtime_error("timeseries: malformed row: " + line);
    s.victim = victim;
    s.good_bps = static_cast<double>(good);
    s.attack_bps = static_cast<double>(attack);
    s.vgw_filters = filters;
    s.shadow_entries = shadows;
    s.requests_cum = req;
    s.escalations_cum = esc;
    samples.push_back(s);
  }
  return samples;
}

}  // namespace aitf
