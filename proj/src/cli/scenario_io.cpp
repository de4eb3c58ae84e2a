#include "uosl/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace uosl::io {
namespace {

constexpr double kDeg = kPi / 180.0;

struct Value {
  std::vector<double> numbers;
  std::string word;
  bool is_vector = false;
  [[nodiscard]] bool is_word() const { return !word.empty(); }
};

struct SegmentDraft {
  sim::SetpointSegment seg;
  bool thrust_set = false;
};

struct Draft {
  sim::Scenario sc;
  std::map<int, SegmentDraft> segments;
  std::map<int, sim::Disturbance> disturbances;
  std::optional<double> window_start, window_end, step_time, step_end, kick_time;
  double band_fraction = 0.1;
  double decay_window = 0.5;
  double swing_band_deg = 1.0;
};

// Accessors return the field in internal units; `scale` converts file units
// to internal ones.
struct Field {
  int size = 1;  // 0 = word
  std::function<std::vector<double>(Draft&, int)> get;
  std::function<void(Draft&, int, const std::vector<double>&)> set;
  std::function<void(Draft&, int, const std::string&)> set_word;
};

template <typename Acc>
Field scalar(Acc acc, double scale = 1.0) {
  Field f;
  f.size = 1;
  f.get = [acc, scale](Draft& d, int n) { return std::vector<double>{acc(d, n) / scale}; };
  f.set = [acc, scale](Draft& d, int n, const std::vector<double>& v) { acc(d, n) = v[0] * scale; };
  return f;
}

template <int N, typename Acc>
Field vec(Acc acc, double scale = 1.0) {
  Field f;
  f.size = N;
  f.get = [acc, scale](Draft& d, int n) {
    std::vector<double> out(N);
    for (int i = 0; i < N; ++i) out[i] = acc(d, n)[i] / scale;
    return out;
  };
  f.set = [acc, scale](Draft& d, int n, const std::vector<double>& v) {
    for (int i = 0; i < N; ++i) acc(d, n)[i] = v[i] * scale;
  };
  return f;
}

template <typename Acc>
Field optional_scalar(Acc acc, double scale = 1.0) {
  Field f;
  f.size = 1;
  f.get = [acc, scale](Draft& d, int n) {
    return std::vector<double>{acc(d, n).value_or(NAN) / scale};
  };
  f.set = [acc, scale](Draft& d, int n, const std::vector<double>& v) { acc(d, n) = v[0] * scale; };
  return f;
}

#define UOSL_AT(expr) [](Draft& d, int) -> auto& { return expr; }
#define UOSL_SEG(expr) [](Draft& d, int n) -> auto& { return d.segments[n].expr; }
#define UOSL_DIST(expr) [](Draft& d, int n) -> auto& { return d.disturbances[n].expr; }

const std::map<std::string, Field>& plain_fields() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> m;
    Field name;
    name.size = 0;
    name.set_word = [](Draft& d, int, const std::string& w) { d.sc.name = w; };
    m["name"] = name;
    Field mode;
    mode.size = 0;
    mode.set_word = [](Draft& d, int, const std::string& w) {
      if (w == "cascade") {
        d.sc.mode = sim::ControlMode::cascade;
      } else if (w == "attitude") {
        d.sc.mode = sim::ControlMode::attitude;
      } else {
        throw std::invalid_argument("mode must be 'cascade' or 'attitude', got '" + w + "'");
      }
    };
    m["mode"] = mode;
    m["duration"] = scalar(UOSL_AT(d.sc.duration));
    m["dt"] = scalar(UOSL_AT(d.sc.dt));
    m["control_rate"] = scalar(UOSL_AT(d.sc.control_rate));

    m["initial.position"] = vec<3>([](Draft& d, int) { return d.sc.initial.q.segment<3>(0); });
    m["initial.attitude"] = vec<3>([](Draft& d, int) { return d.sc.initial.q.segment<3>(3); }, kDeg);
    m["initial.swing"] = vec<2>([](Draft& d, int) { return d.sc.initial.q.segment<2>(6); }, kDeg);
    m["initial.velocity"] = vec<3>([](Draft& d, int) { return d.sc.initial.qdot.segment<3>(0); });
    m["initial.attitude_rate"] =
        vec<3>([](Draft& d, int) { return d.sc.initial.qdot.segment<3>(3); }, kDeg);
    m["initial.swing_rate"] =
        vec<2>([](Draft& d, int) { return d.sc.initial.qdot.segment<2>(6); }, kDeg);

    m["params.uav_mass"] = scalar(UOSL_AT(d.sc.params.uav_mass));
    m["params.load_mass"] = scalar(UOSL_AT(d.sc.params.load_mass));
    m["params.uav_inertia"] = vec<3>(UOSL_AT(d.sc.params.uav_inertia));
    m["params.suspension_offset"] = vec<3>(UOSL_AT(d.sc.params.suspension_offset));
    m["params.cable_length"] = scalar(UOSL_AT(d.sc.params.cable_length));
    m["params.arm_length"] = scalar(UOSL_AT(d.sc.params.arm_length));
    m["params.rotor_torque_coeff"] = scalar(UOSL_AT(d.sc.params.rotor_torque_coeff));
    m["params.gravity"] = scalar(UOSL_AT(d.sc.params.gravity));
    m["params.uav_drag"] = vec<3>(UOSL_AT(d.sc.params.uav_drag));
    m["params.load_drag"] = vec<3>(UOSL_AT(d.sc.params.load_drag));
    m["params.rotational_drag"] = vec<3>(UOSL_AT(d.sc.params.rotational_drag));
    m["params.thrust_limit"] = scalar(UOSL_AT(d.sc.params.thrust_limit));
    m["params.rotor_min_thrust"] = scalar(UOSL_AT(d.sc.params.rotor_min_thrust));
    m["params.rotor_max_thrust"] = scalar(UOSL_AT(d.sc.params.rotor_max_thrust));

    m["gains.attitude"] = vec<3>(UOSL_AT(d.sc.gains.attitude));
    m["gains.attitude_rate"] = vec<3>(UOSL_AT(d.sc.gains.attitude_rate));
    m["gains.swing"] = vec<2>(UOSL_AT(d.sc.gains.swing));
    m["gains.swing_rate"] = vec<2>(UOSL_AT(d.sc.gains.swing_rate));
    m["gains.load_velocity"] = vec<3>(UOSL_AT(d.sc.gains.load_velocity));

    m["analysis.window_start"] = optional_scalar(UOSL_AT(d.window_start));
    m["analysis.window_end"] = optional_scalar(UOSL_AT(d.window_end));
    m["analysis.step_time"] = optional_scalar(UOSL_AT(d.step_time));
    m["analysis.step_end"] = optional_scalar(UOSL_AT(d.step_end));
    m["analysis.kick_time"] = optional_scalar(UOSL_AT(d.kick_time));
    m["analysis.band_fraction"] = scalar(UOSL_AT(d.band_fraction));
    m["analysis.decay_window"] = scalar(UOSL_AT(d.decay_window));
    m["analysis.swing_band"] = scalar(UOSL_AT(d.swing_band_deg));
    return m;
  }();
  return fields;
}

const std::map<std::string, Field>& segment_fields() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> m;
    m["start"] = scalar(UOSL_SEG(seg.start));
    m["load_velocity"] = vec<3>(UOSL_SEG(seg.cascade.load_velocity));
    m["yaw"] = scalar(UOSL_SEG(seg.cascade.yaw), kDeg);
    m["load_accel"] = vec<3>(UOSL_SEG(seg.cascade.load_accel_ff));
    m["swing_accel"] = vec<2>(UOSL_SEG(seg.cascade.swing_accel_ff), kDeg);
    m["attitude_accel"] = vec<3>(UOSL_SEG(seg.cascade.attitude_accel_ff), kDeg);
    Field att;
    att.size = 3;
    att.get = [](Draft& d, int n) {
      const Vec3 a = d.segments[n].seg.attitude.attitude.vec() / kDeg;
      return std::vector<double>{a[0], a[1], a[2]};
    };
    att.set = [](Draft& d, int n, const std::vector<double>& v) {
      d.segments[n].seg.attitude.attitude = {v[0] * kDeg, v[1] * kDeg, v[2] * kDeg};
    };
    m["attitude"] = att;
    Field thrust;
    thrust.size = 1;
    thrust.get = [](Draft& d, int n) {
      return std::vector<double>{d.segments[n].seg.attitude.thrust};
    };
    thrust.set = [](Draft& d, int n, const std::vector<double>& v) {
      d.segments[n].seg.attitude.thrust = v[0];
      d.segments[n].thrust_set = true;
    };
    m["thrust"] = thrust;
    return m;
  }();
  return fields;
}

const std::map<std::string, Field>& disturbance_fields() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> m;
    m["time"] = scalar(UOSL_DIST(time));
    m["swing_rate"] = vec<2>(UOSL_DIST(swing_rate), kDeg);
    return m;
  }();
  return fields;
}

#undef UOSL_AT
#undef UOSL_SEG
#undef UOSL_DIST

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

bool is_word(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

Value parse_value(const std::string& text, int line) {
  Value v;
  if (text.empty()) {
    throw ParseError(line, "missing value");
  }
  if (text.front() == '[') {
    if (text.back() != ']') {
      throw ParseError(line, "unterminated vector '" + text + "'");
    }
    v.is_vector = true;
    std::stringstream items(text.substr(1, text.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto x = parse_number(trim(item));
      if (!x) {
        throw ParseError(line, "bad vector element '" + trim(item) + "'");
      }
      v.numbers.push_back(*x);
    }
    if (v.numbers.empty()) {
      throw ParseError(line, "empty vector");
    }
    return v;
  }
  if (const auto x = parse_number(text)) {
    v.numbers.push_back(*x);
    return v;
  }
  if (is_word(text)) {
    v.word = text;
    return v;
  }
  throw ParseError(line, "cannot parse value '" + text + "'");
}

struct KeyRef {
  const Field* field = nullptr;
  int group = 0;
  std::optional<int> element;
};

std::optional<int> parse_index(const std::string& s) {
  int n = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 0 || s.empty()) {
    return std::nullopt;
  }
  return n;
}

KeyRef resolve(const std::string& raw_key, int line) {
  KeyRef ref;
  std::string key = raw_key;
  if (!key.empty() && key.back() == ']') {
    const auto open = key.rfind('[');
    if (open == std::string::npos) {
      throw ParseError(line, "malformed index in key '" + raw_key + "'");
    }
    ref.element = parse_index(key.substr(open + 1, key.size() - open - 2));
    if (!ref.element) {
      throw ParseError(line, "malformed index in key '" + raw_key + "'");
    }
    key = key.substr(0, open);
  }
  if (const auto it = plain_fields().find(key); it != plain_fields().end()) {
    ref.field = &it->second;
  } else {
    for (const auto& [prefix, table] :
         {std::pair{std::string("setpoint."), &segment_fields()},
          std::pair{std::string("disturbance."), &disturbance_fields()}}) {
      if (key.rfind(prefix, 0) != 0) continue;
      const std::string rest = key.substr(prefix.size());
      const auto dot = rest.find('.');
      const auto group = dot == std::string::npos ? std::nullopt : parse_index(rest.substr(0, dot));
      if (!group) {
        throw ParseError(line, "expected " + prefix + "<index>.<field>, got '" + raw_key + "'");
      }
      const auto it = table->find(rest.substr(dot + 1));
      if (it != table->end()) {
        ref.field = &it->second;
        ref.group = *group;
      }
    }
  }
  if (ref.field == nullptr) {
    throw ParseError(line, "unknown key '" + key + "'");
  }
  if (ref.element && !(ref.field->size > 1 && *ref.element < ref.field->size)) {
    throw ParseError(line, "index out of range in '" + raw_key + "'");
  }
  return ref;
}

void assign(Draft& d, const std::string& key, const std::string& text, int line) {
  const KeyRef ref = resolve(key, line);
  const Value v = parse_value(text, line);
  const Field& f = *ref.field;
  try {
    if (f.size == 0) {
      if (!v.is_word()) {
        throw ParseError(line, "'" + key + "' expects a word");
      }
      f.set_word(d, ref.group, v.word);
      return;
    }
    if (v.is_word()) {
      throw ParseError(line, "'" + key + "' expects a number, got '" + v.word + "'");
    }
    if (ref.element) {
      if (v.is_vector) {
        throw ParseError(line, "'" + key + "' expects a single number");
      }
      auto current = f.get(d, ref.group);
      current[static_cast<std::size_t>(*ref.element)] = v.numbers[0];
      f.set(d, ref.group, current);
      return;
    }
    if (f.size == 1 && v.is_vector) {
      throw ParseError(line, "'" + key + "' expects a single number");
    }
    if (f.size > 1 && (!v.is_vector || static_cast<int>(v.numbers.size()) != f.size)) {
      throw ParseError(line, "'" + key + "' expects a vector of " + std::to_string(f.size) +
                                 " numbers");
    }
    f.set(d, ref.group, v.numbers);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

ScenarioFile finish(Draft& d) {
  ScenarioFile out;
  out.scenario = d.sc;
  auto& sc = out.scenario;
  sc.schedule.clear();
  if (d.segments.empty()) {
    d.segments[0];
  }
  for (auto& [n, seg] : d.segments) {
    if (!seg.thrust_set) {
      seg.seg.attitude.thrust = -sc.params.total_mass() * sc.params.gravity;
    }
    sc.schedule.push_back(seg.seg);
  }
  for (const auto& [n, ev] : d.disturbances) {
    sc.disturbances.push_back(ev);
  }
  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw ParseError(-1, e.what());
  }

  auto& r = out.report;
  r.window.start = d.window_start.value_or(0.0);
  r.window.end = d.window_end.value_or(sc.duration);
  r.band_fraction = d.band_fraction;
  r.decay_window = d.decay_window;
  r.swing_band_deg = d.swing_band_deg;
  r.step_time = d.step_time ? d.step_time : std::optional<double>(
                                                sc.schedule.size() > 1 ? sc.schedule[1].start : 0.0);
  std::optional<double> first_kick;
  for (const auto& ev : sc.disturbances) {
    if (!first_kick || ev.time < *first_kick) first_kick = ev.time;
  }
  r.kick_time = d.kick_time ? d.kick_time : first_kick;
  if (d.step_end) {
    r.step_end = *d.step_end;
  } else {
    r.step_end = sc.duration;
    for (const auto& ev : sc.disturbances) {
      if (ev.time > *r.step_time) r.step_end = std::min(r.step_end, ev.time);
    }
  }
  return out;
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text, const std::vector<std::string>& overrides) {
  Draft d;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    const std::string body = trim(raw);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line, "expected 'key = value', got '" + body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw ParseError(line, "missing key");
    }
    if (!seen.insert(key).second) {
      throw ParseError(line, "duplicate key '" + key + "'");
    }
    assign(d, key, trim(body.substr(eq + 1)), line);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw ParseError(0, "expected key=value, got '" + o + "'");
    }
    assign(d, trim(o.substr(0, eq)), trim(o.substr(eq + 1)), 0);
  }
  return finish(d);
}

ScenarioFile load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(-1, "cannot read scenario file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

void check_key(const std::string& key) { resolve(key, 0); }

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : plain_fields()) keys.push_back(k);
  for (const auto& [k, f] : segment_fields()) keys.push_back("setpoint.<n>." + k);
  for (const auto& [k, f] : disturbance_fields()) keys.push_back("disturbance.<n>." + k);
  return keys;
}

}  // namespace uosl::io
