#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gaitvibe/fusion.hpp"
#include "gaitvibe/locate.hpp"
#include "gaitvibe/signal.hpp"
#include "gaitvibe/simfloor.hpp"

// Plain-text file formats. Numbers are written in shortest round-trip form.
//
// Trace file:
//   # comment lines anywhere
//   fs=500
//   t0=0
//   sensor <id> <x_m> <y_m>        one per channel, column order
//   v1,v2,...,vN                   one row per sample
//
// Event file:   trial_id,strike_time_s,x_m,y_m,foot
// Truth file:   trial_id,step,sensor_id,strike_time_s,arrival_time_s,distance_m,amplitude,peak_time_s
// Localization: seq,t_s,x_m,y_m,v_mps,residual_s,flags
namespace gaitvibe::io
{

std::string format_number(double v);
// Throws InputError on anything but a complete finite number.
double parse_number(std::string_view text);
int parse_int(std::string_view text);
std::vector<std::string_view> split(std::string_view line, char sep);

void write_trace(const std::filesystem::path& path, const VibrationRecord& record);
std::string format_trace(const VibrationRecord& record);
VibrationRecord read_trace(const std::filesystem::path& path);
VibrationRecord parse_trace(const std::string& text);

void write_events(const std::filesystem::path& path, const std::vector<FootstepEvent>& events);
std::vector<FootstepEvent> read_events(const std::filesystem::path& path);

void write_truth(const std::filesystem::path& path, const std::vector<sim::ArrivalTruth>& truth);
std::vector<sim::ArrivalTruth> read_truth(const std::filesystem::path& path);

void write_localization(const std::filesystem::path& path, const std::vector<LocalizedFootstep>& steps);
std::vector<LocalizedFootstep> read_localization(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace gaitvibe::io
