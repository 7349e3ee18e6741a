#pragma once

#include <string_view>
#include <vector>

#include "core/ids.hpp"
#include "core/money.hpp"

namespace bidride {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GpsSample {
  Tick tick = 0;
  double lat = 0.0;  // degrees
  double lon = 0.0;
};

/// Great-circle distance on a sphere of radius 6371 km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct GpsTrack {
  std::vector<GpsSample> samples;  // 4 or 5, strictly increasing ticks
  double precomputed_km = 0.0;
  Money precomputed_fare;
  double reported_km = 0.0;        // driver-supplied, never used for the fare

  /// Throws InvalidTrack.
  void validate() const;
  double sampled_km() const;
};

enum class Discrepancy { None, Inflation, Deflation };
std::string_view to_string(Discrepancy d);

struct DistanceCheck {
  bool ok = true;
  Discrepancy kind = Discrepancy::None;
  double sampled_km = 0.0;
  double reported_km = 0.0;
  double relative_error = 0.0;
  Money settlement_fare;
};

inline constexpr double kDefaultDistanceTolerance = 0.15;

/// Flags |sampled - reported| / max(reported, eps) > tolerance. The
/// settlement fare is the precomputed fare corrected by per_km times the
/// sampled-minus-precomputed distance, with the correction limited to
/// +/- tolerance of the precomputed distance and the fare floored at zero.
DistanceCheck verify_distance(const GpsTrack& track,
                              double tolerance = kDefaultDistanceTolerance,
                              Money per_km = Money::cents(150));

/// Evenly spaced samples along the straight segment between two points.
std::vector<GpsSample> interpolate_track(double lat1, double lon1, double lat2, double lon2,
                                         Tick start, Tick end, int count = 5);

}  // namespace bidride
