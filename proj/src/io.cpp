#include "crashsim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace crashsim {

using nlohmann::json;

namespace {

uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a_double(uint64_t h, double v) {
  // Canonicalize -0.0 so digests do not depend on sign of zero.
  if (v == 0.0) v = 0.0;
  return fnv1a(h, &v, sizeof(v));
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["type"] = scenario_type_name(c.type);
  j["seed"] = c.seed;
  j["n_background_vehicles"] = c.n_background_vehicles;
  j["n_pedestrians"] = c.n_pedestrians;
  j["max_speeds"] = c.max_speeds;
  j["weather"] = c.weather_tag;
  j["timeofday"] = c.timeofday_tag;
  j["duration_cap"] = c.duration_cap;
  return j;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  c.type = scenario_type_from_name(j.at("type").get<std::string>());
  c.seed = j.at("seed").get<uint64_t>();
  c.n_background_vehicles = j.at("n_background_vehicles").get<int>();
  c.n_pedestrians = j.at("n_pedestrians").get<int>();
  c.max_speeds = j.at("max_speeds").get<std::vector<double>>();
  c.weather_tag = j.at("weather").get<std::string>();
  c.timeofday_tag = j.at("timeofday").get<std::string>();
  c.duration_cap = j.at("duration_cap").get<double>();
  return c;
}

json parse_line(const std::string& line, const std::string& path, size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed log line (" +
                             e.what() + ")");
  }
}

[[noreturn]] void line_error(const std::string& path, size_t line_no, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void put_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(os, bits);
}

float get_f32(std::istream& is) {
  const uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string map_digest(const IntersectionMap& map) {
  uint64_t h = 0xcbf29ce484222325ULL;
  const int topo = map.topology == Topology::kFourWay ? 0 : 1;
  const int sig = map.signalized ? 1 : 0;
  h = fnv1a(h, &topo, sizeof(topo));
  h = fnv1a(h, &sig, sizeof(sig));
  h = fnv1a(h, &map.seed, sizeof(map.seed));
  h = fnv1a_double(h, map.lane_width);
  h = fnv1a_double(h, map.left_radius);
  h = fnv1a_double(h, map.right_radius);
  h = fnv1a_double(h, map.stopline_distance);
  for (const auto& route : map.routes) {
    const int key[2] = {static_cast<int>(route.approach), static_cast<int>(route.maneuver)};
    h = fnv1a(h, key, sizeof(key));
    for (const auto& w : route.trajectory.waypoints) {
      h = fnv1a_double(h, w.x);
      h = fnv1a_double(h, w.y);
    }
  }
  for (const auto& b : map.buildings) {
    for (const auto& v : b.vertices) {
      h = fnv1a_double(h, v.x);
      h = fnv1a_double(h, v.y);
    }
  }
  if (map.lights) {
    h = fnv1a_double(h, map.lights->green);
    h = fnv1a_double(h, map.lights->yellow);
    h = fnv1a_double(h, map.lights->offset);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

void write_scenario_log(const ScenarioLog& log, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);

  json header;
  header["format"] = kLogFormat;
  header["config"] = config_to_json(log.config);
  header["map_digest"] = log.map_digest;
  header["ego_id"] = log.ego_id;
  json agents = json::array();
  for (const auto& a : log.agent_info) {
    json ja;
    ja["id"] = a.id;
    ja["class"] = agent_class_name(a.cls);
    ja["role"] = agent_role_name(a.role);
    ja["length"] = a.length;
    ja["width"] = a.width;
    agents.push_back(ja);
  }
  header["agents"] = agents;
  header["infrastructure"] = {{"x", log.infrastructure.pose.x},
                              {"y", log.infrastructure.pose.y},
                              {"yaw", log.infrastructure.pose.yaw},
                              {"height", log.infrastructure.mount_height}};
  os << header.dump() << '\n';

  for (const auto& frame : log.frames) {
    json jf;
    jf["t"] = frame.t;
    json ja = json::array();
    for (const auto& a : frame.agents) {
      ja.push_back({{"id", a.id},
                    {"x", a.pose.x},
                    {"y", a.pose.y},
                    {"yaw", a.pose.yaw},
                    {"v", a.speed},
                    {"s", a.s}});
    }
    jf["agents"] = ja;
    os << jf.dump() << '\n';
  }

  json tail;
  tail["termination"] = termination_reason_name(log.termination);
  if (log.collision) {
    tail["collision"] = {{"a", log.collision->id_a},
                         {"b", log.collision->id_b},
                         {"x", log.collision->contact.x},
                         {"y", log.collision->contact.y},
                         {"t", log.collision->t}};
  }
  os << tail.dump() << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

ScenarioLog read_scenario_log(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() < 2) line_error(path, lines.size() + 1, "truncated log: missing header or tail");

  ScenarioLog log;
  {
    const json header = parse_line(lines[0], path, 1);
    if (!header.contains("format") || header["format"] != kLogFormat) {
      line_error(path, 1, "not a scenario log (bad format tag)");
    }
    log.config = config_from_json(header.at("config"));
    log.map_digest = header.at("map_digest").get<std::string>();
    log.ego_id = header.at("ego_id").get<int>();
    for (const auto& ja : header.at("agents")) {
      SpawnAgent a;
      a.id = ja.at("id").get<int>();
      a.cls = agent_class_from_name(ja.at("class").get<std::string>());
      a.role = agent_role_from_name(ja.at("role").get<std::string>());
      a.length = ja.at("length").get<double>();
      a.width = ja.at("width").get<double>();
      log.agent_info.push_back(a);
    }
    const json& ji = header.at("infrastructure");
    log.infrastructure.pose = Pose2(ji.at("x").get<double>(), ji.at("y").get<double>(),
                                    ji.at("yaw").get<double>());
    log.infrastructure.mount_height = ji.at("height").get<double>();
  }

  std::map<int, std::pair<AgentClass, AgentRole>> meta;
  std::map<int, std::pair<double, double>> dims;
  for (const auto& a : log.agent_info) {
    meta[a.id] = {a.cls, a.role};
    dims[a.id] = {a.length, a.width};
  }

  const json tail = parse_line(lines.back(), path, lines.size());
  if (!tail.contains("termination")) {
    line_error(path, lines.size(), "truncated log: missing termination record");
  }
  log.termination = termination_reason_from_name(tail.at("termination").get<std::string>());
  if (tail.contains("collision")) {
    const json& jc = tail["collision"];
    CollisionRecord rec;
    rec.id_a = jc.at("a").get<int>();
    rec.id_b = jc.at("b").get<int>();
    rec.contact = Vec2(jc.at("x").get<double>(), jc.at("y").get<double>());
    rec.t = jc.at("t").get<double>();
    log.collision = rec;
  }

  for (size_t i = 1; i + 1 < lines.size(); ++i) {
    const size_t line_no = i + 1;
    const json jf = parse_line(lines[i], path, line_no);
    if (!jf.contains("t") || !jf.contains("agents")) {
      line_error(path, line_no, "frame record missing t/agents");
    }
    Frame frame;
    frame.t = jf.at("t").get<double>();
    for (const auto& ja : jf.at("agents")) {
      AgentState st;
      st.id = ja.at("id").get<int>();
      const auto it = meta.find(st.id);
      if (it == meta.end()) line_error(path, line_no, "frame references unknown agent id");
      st.cls = it->second.first;
      st.role = it->second.second;
      st.length = dims[st.id].first;
      st.width = dims[st.id].second;
      st.pose = Pose2(ja.at("x").get<double>(), ja.at("y").get<double>(),
                      ja.at("yaw").get<double>());
      st.speed = ja.at("v").get<double>();
      st.s = ja.at("s").get<double>();
      frame.agents.push_back(st);
    }
    log.frames.push_back(std::move(frame));
  }
  if (log.frames.empty()) line_error(path, 2, "log contains no frames");

  // Restore the header-level initial state mirrors from frame 0.
  for (auto& a : log.agent_info) {
    if (const auto st = log.agent_in_frame(0, a.id)) {
      a.initial_pose = st->pose;
      a.initial_s = st->s;
    }
  }
  return log;
}

void write_motion_field(const MotionField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kGridMagic, 8);
  put_f64(os, field.grid.x_min);
  put_f64(os, field.grid.x_max);
  put_f64(os, field.grid.y_min);
  put_f64(os, field.grid.y_max);
  put_f64(os, field.grid.cell);
  put_u32(os, static_cast<uint32_t>(field.steps()));
  const std::vector<std::vector<float>>* channels[] = {&field.seg,      &field.centerness,
                                                       &field.offset_x, &field.offset_y,
                                                       &field.flow_x,   &field.flow_y};
  for (int tau = 0; tau < field.steps(); ++tau) {
    for (const auto* ch : channels) {
      for (const float v : (*ch)[tau]) put_f32(os, v);
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

MotionField read_motion_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kGridMagic, 8) != 0) {
    throw std::runtime_error(path + ": not a grid file (bad magic)");
  }
  GridSpec grid;
  grid.x_min = get_f64(is);
  grid.x_max = get_f64(is);
  grid.y_min = get_f64(is);
  grid.y_max = get_f64(is);
  grid.cell = get_f64(is);
  const uint32_t steps = get_u32(is);
  if (!is || steps > 1000) throw std::runtime_error(path + ": corrupt grid header");
  MotionField field = MotionField::zeros(grid, static_cast<int>(steps));
  std::vector<std::vector<float>>* channels[] = {&field.seg,      &field.centerness,
                                                 &field.offset_x, &field.offset_y,
                                                 &field.flow_x,   &field.flow_y};
  for (uint32_t tau = 0; tau < steps; ++tau) {
    for (auto* ch : channels) {
      for (auto& v : (*ch)[tau]) v = get_f32(is);
    }
  }
  if (!is) throw std::runtime_error(path + ": truncated grid file");
  return field;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  json j;
  j["format"] = manifest.version;
  j["ratios"] = manifest.ratios;
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json je;
    je["id"] = e.id;
    je["type"] = scenario_type_name(e.type);
    je["seed"] = e.seed;
    je["split"] = e.split;
    je["path"] = e.path;
    je["termination"] = e.termination;
    if (e.collision_time) je["collision_time"] = *e.collision_time;
    entries.push_back(je);
  }
  j["scenarios"] = entries;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed manifest (" + e.what() + ")");
  }
  if (!j.contains("format") || j["format"] != kManifestFormat) {
    throw std::runtime_error(path + ": not a dataset manifest");
  }
  DatasetManifest m;
  m.version = j["format"].get<std::string>();
  m.ratios = j.at("ratios").get<std::array<double, 3>>();
  for (const auto& je : j.at("scenarios")) {
    ManifestEntry e;
    e.id = je.at("id").get<int>();
    e.type = scenario_type_from_name(je.at("type").get<std::string>());
    e.seed = je.at("seed").get<uint64_t>();
    e.split = je.at("split").get<std::string>();
    e.path = je.at("path").get<std::string>();
    e.termination = je.at("termination").get<std::string>();
    if (je.contains("collision_time")) e.collision_time = je["collision_time"].get<double>();
    m.entries.push_back(e);
  }
  return m;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
  constexpr double kW = 640, kH = 420;
  constexpr double kL = 70, kR = 170, kT = 44, kB = 52;  // margins (legend on the right)
  const double plot_w = kW - kL - kR, plot_h = kH - kT - kB;

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        first = false;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
  if (y_hi - y_lo < 1e-12) y_hi = y_lo + 1.0;
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  auto px = [&](double x) { return kL + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kT + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#17becf"};
  constexpr int kNColors = 7;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << xml_escape(title) << "</text>\n";
  // Axes.
  svg << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kT + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kL << "\" y1=\"" << kT + plot_h << "\" x2=\"" << kL + plot_w
      << "\" y2=\"" << kT + plot_h << "\" stroke=\"black\"/>\n";
  // Ticks.
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 5.0;
    svg << "<line x1=\"" << px(xv) << "\" y1=\"" << kT + plot_h << "\" x2=\"" << px(xv)
        << "\" y2=\"" << kT + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kT + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_number(xv) << "</text>\n";
    svg << "<line x1=\"" << kL - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << kL << "\" y2=\""
        << py(yv) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kL - 8 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_number(yv) << "</text>\n";
  }
  svg << "<text x=\"" << kL + plot_w / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << xml_escape(x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kT + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\""
      << "rotate(-90 18 " << kT + plot_h / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % kNColors];
    std::ostringstream pts;
    for (const auto& [x, y] : series[i].points) pts << px(x) << ',' << py(y) << ' ';
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << pts.str() << "\"/>\n";
    for (const auto& [x, y] : series[i].points) {
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = kT + 10 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kL + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << kL + plot_w + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kL + plot_w + 40 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(series[i].name)
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << svg.str();
}

}  // namespace crashsim
