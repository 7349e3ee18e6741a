#include "integrity/gps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace bidride {

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double p1 = lat1 * rad, p2 = lat2 * rad;
  const double dp = (lat2 - lat1) * rad, dl = (lon2 - lon1) * rad;
  const double h = std::sin(dp / 2) * std::sin(dp / 2) +
                   std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

void GpsTrack::validate() const {
  if (samples.size() < 4)
    fail(ErrorKind::InvalidTrack,
         "track has " + std::to_string(samples.size()) + " samples, need at least 4");
  if (samples.size() > 5)
    fail(ErrorKind::InvalidTrack,
         "track has " + std::to_string(samples.size()) + " samples, at most 5 allowed");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].tick <= samples[i - 1].tick)
      fail(ErrorKind::InvalidTrack, "sample timestamps must be strictly increasing");
  for (const GpsSample& s : samples)
    if (!std::isfinite(s.lat) || !std::isfinite(s.lon) || std::abs(s.lat) > 90.0 ||
        std::abs(s.lon) > 180.0)
      fail(ErrorKind::InvalidTrack, "sample coordinates out of range");
  if (!(precomputed_km >= 0.0) || !(reported_km >= 0.0))
    fail(ErrorKind::InvalidTrack, "distances must be non-negative");
}

double GpsTrack::sampled_km() const {
  double d = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    d += haversine_km(samples[i - 1].lat, samples[i - 1].lon, samples[i].lat, samples[i].lon);
  return d;
}

std::string_view to_string(Discrepancy d) {
  switch (d) {
    case Discrepancy::None: return "none";
    case Discrepancy::Inflation: return "inflation";
    case Discrepancy::Deflation: return "deflation";
  }
  return "?";
}

DistanceCheck verify_distance(const GpsTrack& track, double tolerance, Money per_km) {
  track.validate();
  if (!(tolerance >= 0.0)) fail(ErrorKind::InvalidParameter, "tolerance must be non-negative");
  constexpr double eps = 1e-6;
  DistanceCheck r;
  r.sampled_km = track.sampled_km();
  r.reported_km = track.reported_km;
  r.relative_error = std::abs(r.sampled_km - r.reported_km) / std::max(r.reported_km, eps);
  r.ok = r.relative_error <= tolerance;
  if (!r.ok)
    r.kind = r.reported_km > r.sampled_km ? Discrepancy::Inflation : Discrepancy::Deflation;

  const double bound = tolerance * track.precomputed_km;
  const double correction_km =
      std::clamp(r.sampled_km - track.precomputed_km, -bound, bound);
  const long long correction =
      std::llround(correction_km * static_cast<double>(per_km.cents()));
  r.settlement_fare = max(Money::zero(), track.precomputed_fare + Money::cents(correction));
  return r;
}

std::vector<GpsSample> interpolate_track(double lat1, double lon1, double lat2, double lon2,
                                         Tick start, Tick end, int count) {
  std::vector<GpsSample> out;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const Tick t = start + static_cast<Tick>(std::llround(f * static_cast<double>(end - start)));
    out.push_back({t, lat1 + f * (lat2 - lat1), lon1 + f * (lon2 - lon1)});
  }
  return out;
}

}  // namespace bidride
