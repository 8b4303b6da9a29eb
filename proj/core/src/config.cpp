#include "ncsbound/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "ncsbound/error.hpp"

namespace ncsbound::config {

namespace {

int line_of(const toml::node* n) { return n == nullptr ? 0 : static_cast<int>(n->source().begin.line); }

[[noreturn]] void fail(const std::string& field, const toml::node* where, const std::string& message) {
  throw ConfigError(message, field, line_of(where));
}

void only_keys(const toml::table& t, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      fail(path.empty() ? std::string(key.str()) : path + "." + std::string(key.str()), &node, "unknown key");
    }
  }
}

const toml::table* table_at(const toml::table& t, std::string_view key, const std::string& path) {
  const auto* n = t.get(key);
  if (n == nullptr) return nullptr;
  if (!n->is_table()) fail(path, n, "expected a table");
  return n->as_table();
}

const toml::array* array_at(const toml::table& t, std::string_view key, const std::string& path) {
  const auto* n = t.get(key);
  if (n == nullptr) return nullptr;
  if (!n->is_array()) fail(path, n, "expected an array");
  return n->as_array();
}

std::string string_of(const toml::node& n, const std::string& path) {
  if (!n.is_string()) fail(path, &n, "expected a string");
  return n.as_string()->get();
}

std::optional<std::string> opt_string(const toml::table& t, std::string_view key, const std::string& path) {
  const auto* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  return string_of(*n, path);
}

std::string req_string(const toml::table& t, std::string_view key, const std::string& path) {
  auto s = opt_string(t, key, path);
  if (!s) fail(path, &t, "missing required key");
  return *s;
}

double number_of(const toml::node& n, const std::string& path) {
  if (n.is_integer()) return static_cast<double>(n.as_integer()->get());
  if (n.is_floating_point()) return n.as_floating_point()->get();
  fail(path, &n, "expected a number");
}

std::optional<double> opt_number(const toml::table& t, std::string_view key, const std::string& path) {
  const auto* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  return number_of(*n, path);
}

double req_number(const toml::table& t, std::string_view key, const std::string& path) {
  auto v = opt_number(t, key, path);
  if (!v) fail(path, &t, "missing required key");
  return *v;
}

// Numbers are bytes/second; strings may carry a unit suffix.
double rate_of(const toml::node& n, const std::string& path) {
  if (n.is_string()) {
    try {
      return parse_rate(n.as_string()->get());
    } catch (const Error& e) {
      fail(path, &n, e.what());
    }
  }
  return number_of(n, path);
}

// Numbers are in `unit`; strings may carry their own unit and are converted.
double time_of(const toml::node& n, TimeUnit unit, const std::string& path) {
  if (n.is_string()) {
    try {
      return parse_time_value(n.as_string()->get(), unit).in(unit).value;
    } catch (const Error& e) {
      fail(path, &n, e.what());
    }
  }
  return number_of(n, path);
}

std::vector<double> numbers_of(const toml::node& n, const std::string& path) {
  if (!n.is_array()) fail(path, &n, "expected an array of numbers");
  std::vector<double> out;
  std::size_t i = 0;
  for (const auto& item : *n.as_array()) out.push_back(number_of(item, fmt::format("{}[{}]", path, i++)));
  return out;
}

std::vector<std::string> strings_of(const toml::node& n, const std::string& path) {
  if (!n.is_array()) fail(path, &n, "expected an array of strings");
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& item : *n.as_array()) out.push_back(string_of(item, fmt::format("{}[{}]", path, i++)));
  return out;
}

bool is_from_network(const toml::node& n) {
  if (!n.is_string()) return false;
  const auto& s = n.as_string()->get();
  return s == "from-network" || s == "auto";
}

std::vector<const toml::table*> tables_of(const toml::table& t, std::string_view key, const std::string& path) {
  std::vector<const toml::table*> out;
  const auto* arr = array_at(t, key, path);
  if (arr == nullptr) return out;
  std::size_t i = 0;
  for (const auto& item : *arr) {
    if (!item.is_table()) fail(fmt::format("{}[{}]", path, i), &item, "expected a table");
    out.push_back(item.as_table());
    ++i;
  }
  return out;
}

net::NetworkModel parse_network(const toml::table& root, const toml::table& net_table) {
  only_keys(net_table, "network", {"stations", "switch", "link"});
  net::NetworkModel model;
  if (const auto* n = net_table.get("stations")) model.stations = strings_of(*n, "network.stations");

  std::size_t i = 0;
  for (const auto* sw : tables_of(net_table, "switch", "network.switch")) {
    const auto path = fmt::format("network.switch[{}]", i++);
    only_keys(*sw, path, {"id", "port_count", "backplane_capacity"});
    net::SwitchSpec spec;
    spec.id = req_string(*sw, "id", path + ".id");
    const double ports = req_number(*sw, "port_count", path + ".port_count");
    if (ports != std::floor(ports) || ports < 0) fail(path + ".port_count", sw->get("port_count"), "expected a count");
    spec.port_count = static_cast<int>(ports);
    if (const auto* b = sw->get("backplane_capacity")) spec.backplane_capacity = rate_of(*b, path + ".backplane_capacity");
    model.switches.push_back(std::move(spec));
  }

  i = 0;
  for (const auto* link : tables_of(net_table, "link", "network.link")) {
    const auto path = fmt::format("network.link[{}]", i++);
    only_keys(*link, path, {"from", "to", "capacity", "duplex"});
    const auto from = req_string(*link, "from", path + ".from");
    const auto to = req_string(*link, "to", path + ".to");
    const auto* cap = link->get("capacity");
    if (cap == nullptr) fail(path + ".capacity", link, "missing required key");
    const double capacity = rate_of(*cap, path + ".capacity");
    bool duplex = true;
    if (const auto* d = link->get("duplex")) {
      if (!d->is_boolean()) fail(path + ".duplex", d, "expected true or false");
      duplex = d->as_boolean()->get();
    }
    if (duplex) {
      model.add_duplex_link(from, to, capacity);
    } else {
      model.links.push_back({from, to, capacity});
    }
  }

  i = 0;
  for (const auto* st : tables_of(root, "stream", "stream")) {
    const auto path = fmt::format("stream[{}]", i++);
    only_keys(*st, path, {"id", "source", "destination", "sigma", "rho", "max_frame_len", "route"});
    net::Stream s;
    s.id = req_string(*st, "id", path + ".id");
    s.source = req_string(*st, "source", path + ".source");
    s.destination = req_string(*st, "destination", path + ".destination");
    s.envelope0.sigma = req_number(*st, "sigma", path + ".sigma");
    const auto* rho = st->get("rho");
    if (rho == nullptr) fail(path + ".rho", st, "missing required key");
    s.envelope0.rho = rate_of(*rho, path + ".rho");
    s.max_frame_len = req_number(*st, "max_frame_len", path + ".max_frame_len");
    if (const auto* r = st->get("route")) {
      s.route = strings_of(*r, path + ".route");
    } else {
      auto route = net::tree_route(model, s.source, s.destination);
      if (!route) fail(path + ".route", st, "no unique path between source and destination; give the route");
      s.route = std::move(*route);
    }
    model.streams.push_back(std::move(s));
  }

  const auto report = net::validate(model);
  for (const auto& v : report.violations) {
    // Saturation is a property of the analysis, reported by the commands.
    if (v.kind == net::ViolationKind::Saturated) continue;
    fail(v.subject, &net_table, fmt::format("{}: {}", net::to_string(v.kind), v.message));
  }
  return model;
}

lti::TransferFunction parse_tf(const toml::table& t, std::string_view key, const std::string& path, TimeUnit unit,
                               bool required) {
  const auto* tbl = table_at(t, key, path);
  if (tbl == nullptr) {
    if (required) fail(path, &t, "missing required table");
    return {};
  }
  only_keys(*tbl, path, {"num", "den"});
  const auto* num = tbl->get("num");
  const auto* den = tbl->get("den");
  if (num == nullptr) fail(path + ".num", tbl, "missing required key");
  if (den == nullptr) fail(path + ".den", tbl, "missing required key");
  lti::Polynomial d(numbers_of(*den, path + ".den"));
  if (d.is_zero()) fail(path + ".den", den, "denominator is identically zero");
  return {lti::Polynomial(numbers_of(*num, path + ".num")), std::move(d), unit};
}

ControlSection parse_control(const toml::table& t) {
  only_keys(t, "control", {"time_unit", "plant", "controller", "model", "sensor_stream", "actuator_stream"});
  ControlSection c;
  if (const auto* u = t.get("time_unit")) {
    try {
      c.unit = parse_time_unit(string_of(*u, "control.time_unit"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail("control.time_unit", u, e.what());
    }
  } else {
    fail("control.time_unit", &t, "missing required key (\"s\" or \"ms\")");
  }
  c.plant = parse_tf(t, "plant", "control.plant", c.unit, true);
  c.controller = parse_tf(t, "controller", "control.controller", c.unit, true);
  if (t.get("model") != nullptr) c.model = parse_tf(t, "model", "control.model", c.unit, true);
  c.sensor_stream = opt_string(t, "sensor_stream", "control.sensor_stream").value_or("");
  c.actuator_stream = opt_string(t, "actuator_stream", "control.actuator_stream").value_or("");
  return c;
}

StabilitySection parse_stability(const toml::table& t, TimeUnit unit) {
  only_keys(t, "stability", {"ubd", "omega_min", "omega_max", "points_per_decade"});
  StabilitySection s;
  if (const auto* u = t.get("ubd"); u != nullptr && !is_from_network(*u)) {
    // A suffixed value keeps its unit so a mismatch is caught by the check,
    // the same as --ubd on the command line.
    if (u->is_string()) {
      try {
        s.ubd = parse_time_value(u->as_string()->get(), unit);
      } catch (const Error& e) {
        fail("stability.ubd", u, e.what());
      }
    } else {
      s.ubd = TimeValue{number_of(*u, "stability.ubd"), unit};
    }
  }
  if (auto v = opt_number(t, "omega_min", "stability.omega_min")) s.grid.omega_min = *v;
  if (auto v = opt_number(t, "omega_max", "stability.omega_max")) s.grid.omega_max = *v;
  if (auto v = opt_number(t, "points_per_decade", "stability.points_per_decade")) {
    s.grid.points_per_decade = static_cast<int>(*v);
  }
  try {
    (void)s.grid.points();
  } catch (const Error& e) {
    fail("stability", &t, e.what());
  }
  return s;
}

smith::Setpoint parse_setpoint(const toml::table& t, TimeUnit unit) {
  const std::string path = "simulation.setpoint";
  only_keys(t, path, {"kind", "amplitude", "period", "low", "start", "times", "values"});
  const auto kind = opt_string(t, "kind", path + ".kind").value_or("square");
  const double amplitude = opt_number(t, "amplitude", path + ".amplitude").value_or(1.0);
  try {
    if (kind == "step") {
      double start = 0.0;
      if (const auto* s = t.get("start")) start = time_of(*s, unit, path + ".start");
      auto sp = smith::Setpoint::step(amplitude, start);
      sp.low = opt_number(t, "low", path + ".low").value_or(0.0);
      return sp;
    }
    if (kind == "square") {
      double period = 100.0;
      if (const auto* p = t.get("period")) period = time_of(*p, unit, path + ".period");
      return smith::Setpoint::square(amplitude, period, opt_number(t, "low", path + ".low").value_or(0.0));
    }
    if (kind == "samples") {
      const auto* times = t.get("times");
      const auto* values = t.get("values");
      if (times == nullptr || values == nullptr) fail(path, &t, "samples need 'times' and 'values'");
      return smith::Setpoint::samples(numbers_of(*times, path + ".times"), numbers_of(*values, path + ".values"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, &t, e.what());
  }
  fail(path + ".kind", t.get("kind"), "expected \"step\", \"square\" or \"samples\"");
}

DelaySpec parse_delay(const toml::table& t, const std::string& path, TimeUnit unit, DelaySpec base) {
  only_keys(t, path, {"kind", "bound", "redraw_period"});
  if (auto k = opt_string(t, "kind", path + ".kind")) {
    if (*k == "uniform") {
      base.kind = smith::DelayProcess::Kind::Uniform;
    } else if (*k == "constant") {
      base.kind = smith::DelayProcess::Kind::Constant;
    } else {
      fail(path + ".kind", t.get("kind"), "expected \"uniform\" or \"constant\"");
    }
  }
  if (const auto* b = t.get("bound")) {
    if (is_from_network(*b)) {
      base.bound.reset();
    } else {
      base.bound = time_of(*b, unit, path + ".bound");
    }
  }
  if (const auto* r = t.get("redraw_period")) base.redraw_period = time_of(*r, unit, path + ".redraw_period");
  return base;
}

SimulationSection parse_simulation(const toml::table& t, TimeUnit unit) {
  only_keys(t, "simulation",
            {"setpoint", "step", "horizon", "delay", "sensor_delay", "actuator_delay", "model_delay",
             "internal_delay"});
  SimulationSection s;
  if (const auto* sp = table_at(t, "setpoint", "simulation.setpoint")) s.setpoint = parse_setpoint(*sp, unit);
  if (const auto* v = t.get("step")) s.step = time_of(*v, unit, "simulation.step");
  if (const auto* v = t.get("horizon")) s.horizon = time_of(*v, unit, "simulation.horizon");
  if (const auto* d = table_at(t, "delay", "simulation.delay")) {
    s.sensor = parse_delay(*d, "simulation.delay", unit, s.sensor);
    s.actuator = s.sensor;
  }
  if (const auto* d = table_at(t, "sensor_delay", "simulation.sensor_delay")) {
    s.sensor = parse_delay(*d, "simulation.sensor_delay", unit, s.sensor);
  }
  if (const auto* d = table_at(t, "actuator_delay", "simulation.actuator_delay")) {
    s.actuator = parse_delay(*d, "simulation.actuator_delay", unit, s.actuator);
  }
  if (const auto* m = t.get("model_delay"); m != nullptr && !is_from_network(*m)) {
    s.model_delay = time_of(*m, unit, "simulation.model_delay");
  }
  if (auto k = opt_string(t, "internal_delay", "simulation.internal_delay")) {
    if (*k == "exact-buffer") {
      s.internal_delay = smith::InternalDelay::ExactBuffer;
    } else if (*k == "rational-approx") {
      s.internal_delay = smith::InternalDelay::RationalApprox;
    } else {
      fail("simulation.internal_delay", t.get("internal_delay"), "expected \"exact-buffer\" or \"rational-approx\"");
    }
  }
  return s;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, std::string_view source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()), "", static_cast<int>(e.source().begin.line));
  }
  only_keys(root, "", {"network", "stream", "control", "stability", "simulation", "validation", "output"});

  PipelineConfig cfg;
  if (const auto* n = table_at(root, "network", "network")) {
    cfg.network = parse_network(root, *n);
  } else if (root.get("stream") != nullptr) {
    fail("stream", root.get("stream"), "streams need a [network] section");
  }

  TimeUnit unit = TimeUnit::Milliseconds;
  if (const auto* c = table_at(root, "control", "control")) {
    cfg.control = parse_control(*c);
    unit = cfg.control->unit;
    for (const auto* key : {"sensor_stream", "actuator_stream"}) {
      const auto& id = std::string_view(key) == "sensor_stream" ? cfg.control->sensor_stream
                                                                : cfg.control->actuator_stream;
      if (id.empty()) continue;
      if (!cfg.network || cfg.network->find_stream(id) == nullptr) {
        fail(std::string("control.") + key, c->get(key), "no stream '" + id + "' in the network section");
      }
    }
  }
  if (const auto* s = table_at(root, "stability", "stability")) cfg.stability = parse_stability(*s, unit);
  if (const auto* s = table_at(root, "simulation", "simulation")) cfg.simulation = parse_simulation(*s, unit);

  if (const auto* v = table_at(root, "validation", "validation")) {
    only_keys(*v, "validation", {"cases", "horizon"});
    if (auto c = opt_number(*v, "cases", "validation.cases")) {
      if (*c < 0 || *c != std::floor(*c)) fail("validation.cases", v->get("cases"), "expected a count");
      cfg.validation.cases = static_cast<std::size_t>(*c);
    }
    if (const auto* h = v->get("horizon")) {
      cfg.validation.horizon = time_of(*h, TimeUnit::Seconds, "validation.horizon");
    }
  }
  if (const auto* o = table_at(root, "output", "output")) {
    only_keys(*o, "output", {"directory", "capacity_sweep"});
    if (auto d = opt_string(*o, "directory", "output.directory")) cfg.output.directory = *d;
    if (const auto* a = array_at(*o, "capacity_sweep", "output.capacity_sweep")) {
      std::size_t i = 0;
      for (const auto& item : *a) cfg.output.capacity_sweep.push_back(rate_of(item, fmt::format("output.capacity_sweep[{}]", i++)));
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace ncsbound::config
