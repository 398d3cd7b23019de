#include "dsc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dsc/error.hpp"

namespace dsc::cli {

namespace {

using KeyValues = std::map<std::string, std::string>;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& path, const std::string& value, std::string_view expected) {
  throw ConfigError(path + ": expected " + std::string(expected) + ", got '" + value + "'");
}

double to_double_plain(const std::string& path, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(path, text, "a number");
  return v;
}

// Accepts plain decimals and simple fractions such as 26/3.
double to_double(const std::string& path, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return to_double_plain(path, text);
  const double num = to_double_plain(path, trim(text.substr(0, slash)));
  const double den = to_double_plain(path, trim(text.substr(slash + 1)));
  if (den == 0.0) bad_value(path, text, "a non-zero denominator");
  return num / den;
}

std::uint64_t to_u64(const std::string& path, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(path, text, "a non-negative integer");
  return v;
}

bool to_bool(const std::string& path, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  bad_value(path, text, "true or false");
}

std::string format_u64(std::uint64_t v) { return std::to_string(v); }
std::string format_bool(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string path;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

template <typename Member>
Field double_field(std::string path, Member member) {
  return {path,
          [=](ExperimentConfig& c, const std::string& v) { member(c) = to_double(path, v); },
          [=](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_double(member(c));
          }};
}

template <typename Member>
Field optional_double_field(std::string path, Member member) {
  return {path,
          [=](ExperimentConfig& c, const std::string& v) { member(c) = to_double(path, v); },
          [=](const ExperimentConfig& c) -> std::optional<std::string> {
            const auto& v = member(c);
            if (!v) return std::nullopt;
            return format_double(*v);
          }};
}

template <typename Member>
Field unsigned_field(std::string path, Member member) {
  return {path,
          [=](ExperimentConfig& c, const std::string& v) {
            auto& slot = member(c);
            const std::uint64_t parsed = to_u64(path, v);
            using T = std::remove_reference_t<decltype(slot)>;
            if (parsed > std::numeric_limits<T>::max()) bad_value(path, v, "a smaller integer");
            slot = static_cast<T>(parsed);
          },
          [=](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_u64(member(c));
          }};
}

template <typename Member>
Field bool_field(std::string path, Member member) {
  return {path,
          [=](ExperimentConfig& c, const std::string& v) { member(c) = to_bool(path, v); },
          [=](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_bool(member(c));
          }};
}

#define DSC_MEMBER(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> registry = [] {
    std::vector<Field> f;
    f.push_back(double_field("environment.c0", DSC_MEMBER(environment.c0)));
    f.push_back(double_field("environment.gamma", DSC_MEMBER(environment.gamma)));
    f.push_back(double_field("environment.omega", DSC_MEMBER(environment.omega)));

    f.push_back({"sensor.c_star",
                 [](ExperimentConfig& c, const std::string& v) { c.sensor.c_star = to_double("sensor.c_star", v); },
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (c.c_star_ratio) return std::nullopt;
                   return format_double(c.sensor.c_star);
                 }});
    f.push_back(optional_double_field("sensor.c_star_ratio", DSC_MEMBER(c_star_ratio)));
    f.push_back(unsigned_field("sensor.tau_star", DSC_MEMBER(sensor.tau_star)));
    f.push_back(double_field("sensor.r_star", DSC_MEMBER(sensor.r_star)));

    f.push_back(unsigned_field("network.n", DSC_MEMBER(network.n)));
    f.push_back(double_field("network.width", DSC_MEMBER(network.width)));
    f.push_back(double_field("network.height", DSC_MEMBER(network.height)));
    f.push_back(double_field("network.delta", DSC_MEMBER(network.delta)));
    f.push_back({"network.rotation_period",
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "none") {
                     c.network.rotation_period.reset();
                   } else {
                     c.network.rotation_period = to_u64("network.rotation_period", v);
                   }
                 },
                 [](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!c.network.rotation_period) return "none";
                   return format_u64(*c.network.rotation_period);
                 }});
    f.push_back(unsigned_field("network.initial_active", DSC_MEMBER(network.initial_active)));
    f.push_back(unsigned_field("network.seed", DSC_MEMBER(network.seed)));
    f.push_back(double_field("network.failure_rate", DSC_MEMBER(network.failure_rate)));
    f.push_back(bool_field("network.single_shot", DSC_MEMBER(network.single_shot)));
    f.push_back(bool_field("network.refresh_on_detect", DSC_MEMBER(network.refresh_on_detect)));

    f.push_back(unsigned_field("run.steps", DSC_MEMBER(run.steps)));
    f.push_back(unsigned_field("run.n_seeds", DSC_MEMBER(run.n_seeds)));
    f.push_back(double_field("run.tail_fraction", DSC_MEMBER(run.tail_fraction)));

    f.push_back(double_field("meanfield.g", DSC_MEMBER(meanfield.g)));
    f.push_back(double_field("meanfield.nu", DSC_MEMBER(meanfield.nu)));
    f.push_back(double_field("meanfield.t_detect", DSC_MEMBER(meanfield.t_detect)));
    f.push_back(double_field("meanfield.v_star", DSC_MEMBER(meanfield.v_star)));

    f.push_back(unsigned_field("pde.nx", DSC_MEMBER(pde.nx)));
    f.push_back(unsigned_field("pde.ny", DSC_MEMBER(pde.ny)));
    f.push_back(double_field("pde.dx", DSC_MEMBER(pde.dx)));
    f.push_back(optional_double_field("pde.diffusivity", DSC_MEMBER(pde.diffusivity)));
    f.push_back(optional_double_field("pde.density", DSC_MEMBER(pde.density)));
    f.push_back(optional_double_field("pde.alpha", DSC_MEMBER(pde.alpha)));
    f.push_back(optional_double_field("pde.dt", DSC_MEMBER(pde.dt)));
    f.push_back(double_field("pde.t_end", DSC_MEMBER(pde.t_end)));
    f.push_back(unsigned_field("pde.seed_columns", DSC_MEMBER(pde.seed_columns)));
    f.push_back(double_field("pde.seed_fraction", DSC_MEMBER(pde.seed_fraction)));
    f.push_back(optional_double_field("pde.level", DSC_MEMBER(pde.level)));
    return f;
  }();
  return registry;
}

#undef DSC_MEMBER

const Field* find_field(const std::string& path) {
  for (const Field& f : fields()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

const std::vector<std::string>& sections() {
  static const std::vector<std::string> names{"environment", "sensor", "network", "run", "meanfield", "pde"};
  return names;
}

void check(bool ok, const std::string& invariant) {
  if (!ok) throw ConfigError("invalid configuration: " + invariant);
}

// Applies defaults that depend on other fields and checks every invariant.
void finalize(ExperimentConfig& c, const KeyValues& given) {
  const bool has_c_star = given.contains("sensor.c_star");
  const bool has_ratio = given.contains("sensor.c_star_ratio");
  check(has_c_star || has_ratio, "sensor.c_star is required (or sensor.c_star_ratio)");
  check(!(has_c_star && has_ratio), "give only one of sensor.c_star and sensor.c_star_ratio");
  if (!has_ratio) c.c_star_ratio.reset();
  if (c.c_star_ratio) c.sensor.c_star = *c.c_star_ratio * c.environment.c0;
  if (!given.contains("network.rotation_period")) {
    c.network.rotation_period = 10 * static_cast<std::uint64_t>(c.sensor.tau_star);
  }

  try {
    environment::validate(c.environment);
    sensor::validate(c.sensor);
    netsim::validate(c.network);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  check(c.run.steps >= 1, "run.steps must be >= 1");
  check(c.run.n_seeds >= 1, "run.n_seeds must be >= 1");
  check(c.run.tail_fraction > 0.0 && c.run.tail_fraction <= 1.0, "run.tail_fraction must lie in (0, 1]");
  check(c.meanfield.g > 0.0, "meanfield.g must be > 0");
  check(c.meanfield.nu >= 0.0 && c.meanfield.nu <= 1.0, "meanfield.nu must lie in [0, 1]");
  check(c.meanfield.t_detect > 0.0, "meanfield.t_detect must be > 0");
  check(c.meanfield.v_star >= 0.0, "meanfield.v_star must be >= 0");
  check(c.pde.nx >= 1 && c.pde.ny >= 1, "pde.nx and pde.ny must be >= 1");
  check(c.pde.dx > 0.0, "pde.dx must be > 0");
  check(c.pde.t_end > 0.0, "pde.t_end must be > 0");
  check(!c.pde.diffusivity || *c.pde.diffusivity >= 0.0, "pde.diffusivity must be >= 0");
  check(!c.pde.density || *c.pde.density > 0.0, "pde.density must be > 0");
  check(!c.pde.alpha || *c.pde.alpha >= 0.0, "pde.alpha must be >= 0");
  check(!c.pde.dt || *c.pde.dt > 0.0, "pde.dt must be > 0");
  check(c.pde.seed_columns <= c.pde.nx, "pde.seed_columns must not exceed pde.nx");
  check(c.pde.seed_fraction >= 0.0 && c.pde.seed_fraction <= 1.0, "pde.seed_fraction must lie in [0, 1]");
  check(!c.pde.level || (*c.pde.level > 0.0 && *c.pde.level < 1.0), "pde.level must lie in (0, 1)");
}

ExperimentConfig build(const KeyValues& kv) {
  ExperimentConfig c;
  for (const auto& [path, value] : kv) {
    const Field* f = find_field(path);
    if (f == nullptr) throw ConfigError("unknown key '" + path + "'");
    f->set(c, value);
  }
  finalize(c, kv);
  return c;
}

// Override semantics: c_star and c_star_ratio replace each other.
void assign(KeyValues& kv, const std::string& path, const std::string& value) {
  if (path == "sensor.c_star") kv.erase("sensor.c_star_ratio");
  if (path == "sensor.c_star_ratio") kv.erase("sensor.c_star");
  kv[path] = value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

KeyValues key_values(const ExperimentConfig& c) {
  KeyValues kv;
  for (const Field& f : fields()) {
    if (auto v = f.get(c)) kv[f.path] = *v;
  }
  return kv;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

ExperimentConfig parse_config(std::string_view text, const Overrides& overrides) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }

  KeyValues kv;
  std::vector<SweepAxis> sweep;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("key '" + section + "' appears outside of a section");
    }
    const bool is_sweep = section == "sweep";
    if (!is_sweep && std::find(sections().begin(), sections().end(), section) == sections().end()) {
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const std::string value = trim(node.data());
      if (is_sweep) {
        sweep.push_back({key, split_list(value)});
      } else {
        const std::string path = section + "." + key;
        if (kv.contains(path)) throw ConfigError("duplicate key '" + path + "'");
        kv[path] = value;
      }
    }
  }
  for (const auto& [path, value] : overrides) {
    if (find_field(path) == nullptr) throw ConfigError("unknown override key '" + path + "'");
    assign(kv, path, value);
  }

  ExperimentConfig config = build(kv);

  for (const SweepAxis& axis : sweep) {
    if (find_field(axis.path) == nullptr) throw ConfigError("sweep over unknown parameter '" + axis.path + "'");
    check(!axis.values.empty(), "sweep grid for '" + axis.path + "' must be non-empty");
    const auto dup = std::count_if(sweep.begin(), sweep.end(), [&](const SweepAxis& a) { return a.path == axis.path; });
    check(dup == 1, "sweep parameter '" + axis.path + "' listed twice");
    for (const std::string& v : axis.values) {
      KeyValues point = kv;
      assign(point, axis.path, v);
      build(point);
    }
  }
  config.sweep = std::move(sweep);
  return config;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  std::string current;
  for (const Field& f : fields()) {
    const auto value = f.get(c);
    if (!value) continue;
    const auto dot = f.path.find('.');
    const std::string section = f.path.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << f.path.substr(dot + 1) << " = " << *value << '\n';
  }
  if (!c.sweep.empty()) {
    out << "\n[sweep]\n";
    for (const SweepAxis& axis : c.sweep) {
      out << axis.path << " = ";
      for (std::size_t i = 0; i < axis.values.size(); ++i) out << (i ? ", " : "") << axis.values[i];
      out << '\n';
    }
  }
  return out.str();
}

Overrides overrides_from_environment(std::span<const std::string> entries) {
  constexpr std::string_view kPrefix = "DSC_";
  Overrides out;
  for (const std::string& entry : entries) {
    if (!entry.starts_with(kPrefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(kPrefix.size(), eq - kPrefix.size());
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    const auto sep = name.find('_');
    if (sep == std::string::npos) throw ConfigError("malformed override variable '" + entry.substr(0, eq) + "'");
    out[name.substr(0, sep) + "." + name.substr(sep + 1)] = entry.substr(eq + 1);
  }
  return out;
}

ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& path, const std::string& value) {
  if (find_field(path) == nullptr) throw ConfigError("unknown parameter '" + path + "'");
  KeyValues kv = key_values(config);
  assign(kv, path, value);
  ExperimentConfig out = build(kv);
  out.sweep = config.sweep;
  return out;
}

}  // namespace dsc::cli
