#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Frequency-domain filtering primitives shared by the signal and simulator
// modules. All filters are zero-phase: the transfer function is real and
// non-negative, so band-limited features keep their timing.
namespace gaitvibe::dsp
{

// Width of the raised-cosine skirt placed outside each band edge.
inline constexpr double kTransitionHz = 10.0;

// Zero-phase gain of the band [low, high] at frequency |f|.
double band_gain(double f_hz, double low_hz, double high_hz,
                 double transition_hz = kTransitionHz);

// Band-pass filter. Input is zero-padded to at least twice its length so the
// circular convolution does not wrap.
std::vector<double> bandpass(std::span<const double> x, double fs, double low_hz,
                             double high_hz);

// Magnitude of the analytic signal of the band-passed input.
std::vector<double> band_envelope(std::span<const double> x, double fs, double low_hz,
                                  double high_hz);

// Centered moving average over 2*half_width+1 samples; windows shrink at the edges.
std::vector<double> moving_average(std::span<const double> x, std::size_t half_width);

// Centered moving variance (population) matching moving_average's windows.
std::vector<double> moving_variance(std::span<const double> x, std::span<const double> mean,
                                    std::size_t half_width);

// Vertex offset in [-0.5, 0.5] samples of the parabola through three equally spaced
// values centered on b. Returns 0 when the points are not concave.
double parabolic_offset(double a, double b, double c);

} // namespace gaitvibe::dsp
