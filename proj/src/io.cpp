#include "gaitvibe/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gaitvibe/errors.hpp"

namespace gaitvibe::io
{
namespace
{

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> data_lines(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
  {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    out.emplace_back(t);
  }
  return out;
}

bool is_header(std::string_view line)
{
  const auto first = trim(split(line, ',').front());
  return !first.empty() && !(std::isdigit(static_cast<unsigned char>(first.front())) ||
                             first.front() == '-' || first.front() == '+' || first.front() == '.');
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n, const std::string& what,
                   std::size_t line)
{
  if (f.size() != n)
    throw InputError(what + " line " + std::to_string(line) + ": expected " + std::to_string(n) +
                     " fields, got " + std::to_string(f.size()));
}

} // namespace

std::string format_number(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_number(std::string_view text)
{
  const auto t = trim(text);
  double v = 0.0;
  const char* begin = t.data();
  if (!t.empty() && t.front() == '+')
    ++begin;
  const auto r = std::from_chars(begin, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw InputError("not a number: '" + std::string(text) + "'");
  if (!std::isfinite(v))
    throw InputError("non-finite value '" + std::string(text) + "'");
  return v;
}

int parse_int(std::string_view text)
{
  const auto t = trim(text);
  int v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw InputError("not an integer: '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true)
  {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos)
    {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_text(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write " + path.string());
  out << text;
}

std::string format_trace(const VibrationRecord& record)
{
  std::string s = "# gaitvibe vibration trace\n";
  s += "fs=" + format_number(record.sample_rate()) + "\n";
  s += "t0=" + format_number(record.t0) + "\n";
  for (const auto& ch : record.channels)
    s += "sensor " + std::to_string(ch.sensor_id) + " " + format_number(ch.position.x) + " " +
         format_number(ch.position.y) + "\n";
  for (std::size_t i = 0; i < record.sample_count(); ++i)
  {
    for (std::size_t c = 0; c < record.channels.size(); ++c)
    {
      if (c)
        s += ',';
      s += format_number(record.channels[c].samples[i]);
    }
    s += '\n';
  }
  return s;
}

void write_trace(const std::filesystem::path& path, const VibrationRecord& record)
{
  write_text(path, format_trace(record));
}

VibrationRecord parse_trace(const std::string& text)
{
  VibrationRecord rec;
  double fs = kDefaultSampleRateHz;
  bool have_fs = false;
  std::size_t line_no = 0;
  for (const auto& line : data_lines(text))
  {
    ++line_no;
    std::string_view l = line;
    if (l.substr(0, 3) == "fs=")
    {
      fs = parse_number(l.substr(3));
      have_fs = true;
      continue;
    }
    if (l.substr(0, 3) == "t0=")
    {
      rec.t0 = parse_number(l.substr(3));
      continue;
    }
    if (l.substr(0, 7) == "sensor ")
    {
      std::vector<std::string_view> f;
      for (auto part : split(l.substr(7), ' '))
        if (!trim(part).empty())
          f.push_back(part);
      if (f.size() != 3)
        throw InputError("trace sensor line needs '<id> <x> <y>'");
      rec.channels.push_back({parse_int(f[0]), {parse_number(f[1]), parse_number(f[2])}, {}, fs});
      continue;
    }
    if (rec.channels.empty())
      throw InputError("trace has samples before any sensor line");
    const auto f = split(l, ',');
    expect_fields(f, rec.channels.size(), "trace", line_no);
    for (std::size_t c = 0; c < f.size(); ++c)
      rec.channels[c].samples.push_back(parse_number(f[c]));
  }
  if (!have_fs)
    throw InputError("trace lacks an fs= header");
  for (auto& ch : rec.channels)
    ch.sample_rate_hz = fs;
  rec.validate();
  return rec;
}

VibrationRecord read_trace(const std::filesystem::path& path)
{
  try
  {
    return parse_trace(read_text(path));
  }
  catch (const InputError& e)
  {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_events(const std::filesystem::path& path, const std::vector<FootstepEvent>& events)
{
  std::string s = "trial_id,strike_time_s,x_m,y_m,foot\n";
  for (const auto& e : events)
    s += std::to_string(e.trial_id) + "," + format_number(e.strike_time) + "," +
         format_number(e.location.x) + "," + format_number(e.location.y) + "," + to_string(e.foot) + "\n";
  write_text(path, s);
}

std::vector<FootstepEvent> read_events(const std::filesystem::path& path)
{
  std::vector<FootstepEvent> out;
  std::map<int, double> last;
  std::size_t line_no = 0;
  for (const auto& line : data_lines(read_text(path)))
  {
    ++line_no;
    if (line_no == 1 && is_header(line))
      continue;
    const auto f = split(line, ',');
    if (f.size() != 4 && f.size() != 5)
      throw InputError(path.string() + " line " + std::to_string(line_no) + ": expected 5 fields");
    FootstepEvent e;
    e.trial_id = parse_int(f[0]);
    e.strike_time = parse_number(f[1]);
    e.location = {parse_number(f[2]), parse_number(f[3])};
    e.foot = f.size() == 5 ? parse_foot(std::string(f[4])) : Foot::Unknown;
    const auto it = last.find(e.trial_id);
    if (it != last.end() && !(e.strike_time > it->second))
      throw InputError(path.string() + ": strike times of trial " + std::to_string(e.trial_id) +
                       " are not strictly increasing");
    last[e.trial_id] = e.strike_time;
    out.push_back(e);
  }
  return out;
}

void write_truth(const std::filesystem::path& path, const std::vector<sim::ArrivalTruth>& truth)
{
  std::string s = "trial_id,step,sensor_id,strike_time_s,arrival_time_s,distance_m,amplitude,peak_time_s\n";
  for (const auto& t : truth)
    s += std::to_string(t.trial_id) + "," + std::to_string(t.step) + "," + std::to_string(t.sensor_id) +
         "," + format_number(t.strike_time) + "," + format_number(t.arrival_time) + "," +
         format_number(t.distance) + "," + format_number(t.amplitude) + "," + format_number(t.peak_time) + "\n";
  write_text(path, s);
}

std::vector<sim::ArrivalTruth> read_truth(const std::filesystem::path& path)
{
  std::vector<sim::ArrivalTruth> out;
  std::size_t line_no = 0;
  for (const auto& line : data_lines(read_text(path)))
  {
    ++line_no;
    if (line_no == 1 && is_header(line))
      continue;
    const auto f = split(line, ',');
    expect_fields(f, 8, path.string(), line_no);
    out.push_back({parse_int(f[0]), parse_int(f[1]), parse_int(f[2]), parse_number(f[3]),
                   parse_number(f[4]), parse_number(f[5]), parse_number(f[6]), parse_number(f[7])});
  }
  return out;
}

void write_localization(const std::filesystem::path& path, const std::vector<LocalizedFootstep>& steps)
{
  std::string s = "seq,t_s,x_m,y_m,v_mps,residual_s,flags\n";
  for (const auto& st : steps)
    s += std::to_string(st.seq) + "," + format_number(st.time) + "," + format_number(st.location.x) + "," +
         format_number(st.location.y) + "," + format_number(st.velocity) + "," +
         format_number(st.residual) + "," + flags_to_string(st.flags) + "\n";
  write_text(path, s);
}

std::vector<LocalizedFootstep> read_localization(const std::filesystem::path& path)
{
  std::vector<LocalizedFootstep> out;
  std::size_t line_no = 0;
  for (const auto& line : data_lines(read_text(path)))
  {
    ++line_no;
    if (line_no == 1 && is_header(line))
      continue;
    const auto f = split(line, ',');
    expect_fields(f, 7, path.string(), line_no);
    LocalizedFootstep st;
    st.seq = parse_int(f[0]);
    st.time = parse_number(f[1]);
    st.location = {parse_number(f[2]), parse_number(f[3])};
    st.velocity = parse_number(f[4]);
    st.residual = parse_number(f[5]);
    for (auto flag : split(trim(f[6]), '|'))
    {
      const auto name = trim(flag);
      if (name == "initial")
        st.flags |= kFlagInitial;
      else if (name == "recovery")
        st.flags |= kFlagRecovery;
      else if (name == "order_relaxed")
        st.flags |= kFlagOrderRelaxed;
      else if (name == "truncated")
        st.flags |= kFlagTruncated;
      else if (name == "boundary")
        st.flags |= kFlagBoundary;
    }
    out.push_back(st);
  }
  return out;
}

} // namespace gaitvibe::io
