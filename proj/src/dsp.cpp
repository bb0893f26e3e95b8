#include "gaitvibe/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace gaitvibe::dsp
{
namespace
{

std::size_t padded_size(std::size_t n)
{
  std::size_t m = 1;
  while (m < 2 * n)
    m <<= 1;
  return m;
}

enum class Output
{
  Real,
  Envelope
};

std::vector<double> filter(std::span<const double> x, double fs, double low_hz, double high_hz,
                           Output output)
{
  const std::size_t n = x.size();
  if (n == 0)
    return {};

  const std::size_t m = padded_size(n);
  std::vector<double> padded(m, 0.0);
  std::copy(x.begin(), x.end(), padded.begin());

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);

  const double df = fs / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k)
  {
    const bool negative = k > m / 2;
    const double f = negative ? static_cast<double>(m - k) * df : static_cast<double>(k) * df;
    double g = band_gain(f, low_hz, high_hz);
    if (output == Output::Envelope)
    {
      if (negative)
        g = 0.0;
      else if (k != 0 && k != m / 2)
        g *= 2.0;
    }
    spectrum[k] *= g;
  }

  std::vector<std::complex<double>> time;
  fft.inv(time, spectrum);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = output == Output::Real ? time[i].real() : std::abs(time[i]);
  return out;
}

} // namespace

double band_gain(double f_hz, double low_hz, double high_hz, double transition_hz)
{
  const double f = std::abs(f_hz);
  if (f >= low_hz && f <= high_hz)
    return 1.0;
  if (transition_hz <= 0.0)
    return 0.0;
  if (f < low_hz && f > low_hz - transition_hz)
    return 0.5 * (1.0 - std::cos(std::numbers::pi * (f - (low_hz - transition_hz)) / transition_hz));
  if (f > high_hz && f < high_hz + transition_hz)
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (f - high_hz) / transition_hz));
  return 0.0;
}

std::vector<double> bandpass(std::span<const double> x, double fs, double low_hz, double high_hz)
{
  return filter(x, fs, low_hz, high_hz, Output::Real);
}

std::vector<double> band_envelope(std::span<const double> x, double fs, double low_hz,
                                  double high_hz)
{
  return filter(x, fs, low_hz, high_hz, Output::Envelope);
}

std::vector<double> moving_average(std::span<const double> x, std::size_t half_width)
{
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] + x[i];

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const std::size_t lo = i >= half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n, i + half_width + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> moving_variance(std::span<const double> x, std::span<const double> mean,
                                    std::size_t half_width)
{
  const std::size_t n = x.size();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i)
    sq[i] = x[i] * x[i];
  std::vector<double> out = moving_average(sq, half_width);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::max(0.0, out[i] - mean[i] * mean[i]);
  return out;
}

double parabolic_offset(double a, double b, double c)
{
  const double den = a - 2.0 * b + c;
  if (!(den < 0.0))
    return 0.0;
  const double off = 0.5 * (a - c) / den;
  return std::clamp(off, -0.5, 0.5);
}

} // namespace gaitvibe::dsp
