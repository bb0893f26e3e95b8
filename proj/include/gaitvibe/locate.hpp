#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/geometry.hpp"
#include "gaitvibe/signal.hpp"

// Operating stage: vibration-only footstep localization by TDoA grid search
// over a proposal region, using the calibrated velocity profile.
namespace gaitvibe
{

inline constexpr double kProposalSizeM = 1.0;
inline constexpr double kSoftBoundaryM = 1.0;
inline constexpr double kGridResolutionM = 0.05;

struct LocationProposal
{
  Rect box;
  Point2 center;
  bool is_initial = false;
};

/// Square of side `size` centered on the previous location, clipped to the
/// floor. Without a previous location: the sensor bounding box grown by the
/// soft boundary, clipped to the floor. `extra_margin` grows the box further.
LocationProposal propose_next(std::optional<Point2> prev, Rect floor,
                              const std::vector<SensorInfo>& sensors, double size = kProposalSizeM,
                              double extra_margin = 0.0);

struct ArrivalSelection
{
  std::vector<ArrivalEstimate> arrivals;
  bool order_relaxed = false;
};

struct ArrivalOptions
{
  double candidate_sigma = kCandidateSigma;
  double ratio_sigmas = 3.0;
  // Lower limit on the amplitude window half-width, as a ratio.
  double min_ratio_halfwidth = 0.01;
  double tie_tolerance = kDistanceTieM;
  double time_tolerance = kOrderTimeTolS;
  double grid_resolution = kGridResolutionM;
};

// Sensor pairs whose distance order is the same at every grid point of the
// box: must_precede[a][b] when a is nearer than b everywhere.
OrderConstraints proposal_order(const std::vector<SensorInfo>& sensors, const Rect& box,
                                double resolution, double tie_tolerance);

/// Per-sensor candidates between the first noise-bound exceedance and the
/// peak, filtered by the calibrated arrival/peak ratio window; then the
/// earliest combination consistent with the proposal's distance order. When
/// no combination is order-consistent the order rule is dropped and
/// order_relaxed is set. Throws NoArrivalFound when fewer than 3 sensors keep
/// candidates.
ArrivalSelection estimate_arrivals(const FootstepSegment& segment, const LocationProposal& proposal,
                                   const CalibrationProfile& profile,
                                   const ArrivalOptions& options = {});

struct TdoaEntry
{
  int sensor_id = 0;
  Point2 position;
  double dt = 0.0;
};

struct TdoaVector
{
  int reference_id = 0;
  double reference_time = 0.0;
  std::vector<TdoaEntry> entries;

  const TdoaEntry& reference() const;
};

/// Differences to the sensor with the largest segment peak. Throws
/// ArrivalRejected when some |dt| exceeds max_dt, InputError with fewer
/// than 3 arrivals.
TdoaVector tdoa(const std::vector<ArrivalEstimate>& arrivals, const FootstepSegment& segment,
                double max_dt);

// Same, with the reference given explicitly.
TdoaVector tdoa(const std::vector<ArrivalEstimate>& arrivals, const std::vector<SensorInfo>& sensors,
                int reference_id, double max_dt);

enum class ResidualNorm
{
  L2,
  L1
};

struct GridOptions
{
  double resolution = kGridResolutionM;
  ResidualNorm norm = ResidualNorm::L2;
};

enum StepFlag : unsigned
{
  kFlagNone = 0,
  kFlagOrderRelaxed = 1u << 0,
  kFlagInitial = 1u << 1,
  kFlagRecovery = 1u << 2,
  kFlagTruncated = 1u << 3,
  kFlagBoundary = 1u << 4,
};

std::string flags_to_string(unsigned flags);

struct LocalizedFootstep
{
  int seq = 0;
  Point2 location;
  // Estimated strike time: reference arrival minus travel time.
  double time = 0.0;
  double segment_time = 0.0;
  double velocity = 0.0;
  double residual = 0.0;
  unsigned flags = kFlagNone;
  std::string note;
};

// TDoA residual of candidate location p at wave speed v.
double tdoa_residual(const TdoaVector& tdoa, Point2 p, double v, ResidualNorm norm);

// Lattice covering the box at the given resolution, anchored at its minimum
// corner. Throws InputError when the box is empty or resolution non-positive.
std::vector<Point2> grid_points(const Rect& box, double resolution);

/// v = profile(p) best matches. Ties within 1e-12 relative (or 1e-15 s) go to the point
/// nearest the proposal center, then smallest (x, y).
LocalizedFootstep localize(const TdoaVector& tdoa, const LocationProposal& proposal,
                           const VelocityProfile& profile, const GridOptions& options = {});

struct BaselineOptions
{
  double resolution = kGridResolutionM;
  double v_step = 5.0;
  double v_min = kDefaultVMin;
  double v_max = kDefaultVMax;
  ResidualNorm norm = ResidualNorm::L2;
};

/// Joint grid search over location and one constant wave speed.
LocalizedFootstep baseline_localize(const TdoaVector& tdoa, const Rect& area,
                                    const BaselineOptions& options = {});

enum class PickerSignal
{
  // Smoothed magnitude of the broadband detection signal.
  Detection,
  // Arrival-band envelope.
  Arrival
};

// Conventional first-arrival picker for the baseline: first sample where the
// chosen envelope exceeds mean + z * std, searched up to its maximum.
std::vector<ArrivalEstimate> threshold_arrivals(const FootstepSegment& segment,
                                                const NoiseModel& noise, double z = 3.0,
                                                PickerSignal signal = PickerSignal::Detection,
                                                std::size_t smoothing_half_width = 5);

struct TrackOptions
{
  Rect floor{0.0, 7.0, -1.0, 1.0};
  SegmentationOptions segmentation;
  ArrivalOptions arrivals;
  GridOptions grid;
  double proposal_size = 2.0;
  double soft_boundary = kSoftBoundaryM;
  double recovery_step = 0.5;
  // A gap this many median step intervals long counts as missed steps.
  double gap_factor = 1.5;
};

struct StepFailure
{
  int seq = 0;
  double segment_time = 0.0;
  std::string reason;
};

struct TrackResult
{
  std::vector<LocalizedFootstep> footsteps;
  std::vector<StepFailure> failures;
  std::vector<FootstepSegment> segments;
};

/// detect -> propose -> estimate arrivals -> TDoA -> localize, chaining each
/// proposal from the last estimate. Failed steps are recorded and the next
/// proposal grows by recovery_step per missed step.
TrackResult track_trial(const VibrationRecord& record, const CalibrationProfile& profile,
                        const TrackOptions& options = {});

} // namespace gaitvibe
