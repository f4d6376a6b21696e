#include "ffid/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace ffid {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw Error(ErrorKind::invalid_input, "not a number: '" + token + "'");
  return v;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::config, "failed writing '" + path.string() + "'");
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::invalid_input, "missing CSV column '" + name + "'");
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream os;
      os << "line " << line_no << " has " << cells.size() << " cells, header has " << table.header.size();
      throw Error(ErrorKind::invalid_input, os.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        row[i] = parse_double(cells[i]);
      } catch (const Error&) {
        std::ostringstream os;
        os << "line " << line_no << ", column '" << table.header[i] << "': not a number '" << cells[i] << "'";
        throw Error(ErrorKind::invalid_input, os.str());
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorKind::invalid_input, "CSV has no header");
  return table;
}

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double get_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw Error(ErrorKind::invalid_input, "expected a number, got " + j.dump());
}

template <typename Vec>
Json vector_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j, Eigen::Index expected) {
  if (!j.is_array() || (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected)) {
    std::ostringstream os;
    os << "expected an array of " << expected << " numbers, got " << j.dump();
    throw Error(ErrorKind::invalid_input, os.str());
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = get_number(j[i]);
  return v;
}

template <typename F>
auto rethrow_as(ErrorKind kind, const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(kind, context + ": " + e.what());
  } catch (const Json::exception& e) {
    throw Error(kind, context + ": " + e.what());
  }
}

}  // namespace

Json to_json(const FourierTrajectory& traj) {
  Json j;
  j["omega_f"] = traj.omega_f;
  j["harmonics"] = traj.harmonics;
  j["axes"] = Json::array();
  static const char* names[6] = {"x", "y", "z", "phi", "theta", "psi"};
  for (int i = 0; i < 6; ++i) {
    Json a;
    a["name"] = names[i];
    a["a0"] = traj.axes[i].a0;
    a["a"] = vector_json(traj.axes[i].a);
    a["b"] = vector_json(traj.axes[i].b);
    j["axes"].push_back(a);
  }
  return j;
}

FourierTrajectory trajectory_from_json(const Json& j) {
  const double w = get_number(j.at("omega_f"));
  const int n = j.at("harmonics").get<int>();
  if (!(w > 0.0) || n < 0) throw Error(ErrorKind::invalid_input, "trajectory needs omega_f > 0 and harmonics >= 0");
  const Json& axes = j.at("axes");
  if (!axes.is_array() || axes.size() != 6) throw Error(ErrorKind::invalid_input, "trajectory needs 6 axes");
  FourierTrajectory traj = FourierTrajectory::zero(w, n);
  for (int i = 0; i < 6; ++i) {
    traj.axes[i].a0 = get_number(axes[i].at("a0"));
    traj.axes[i].a = vector_from_json(axes[i].at("a"), n);
    traj.axes[i].b = vector_from_json(axes[i].at("b"), n);
  }
  return traj;
}

void save_trajectory(const fs::path& path, const FourierTrajectory& traj) {
  write_text_file(path, to_json(traj).dump(2) + "\n");
}

FourierTrajectory load_trajectory(const fs::path& path) {
  const std::string text = read_text_file(path);
  return rethrow_as(ErrorKind::config, "trajectory file '" + path.string() + "'",
                    [&] { return trajectory_from_json(Json::parse(text)); });
}

fs::path metadata_path(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

Json to_json(const LogMetadata& m) {
  Json j;
  j["period"] = m.period;
  j["cycles"] = m.cycles;
  j["sample_rate"] = m.sample_rate;
  j["control_period"] = m.control_period;
  j["convention"] = to_string(m.convention);
  j["seed"] = m.seed;
  j["noise_seed"] = m.noise_seed;
  j["position_sigma"] = m.position_sigma;
  j["angle_sigma"] = m.angle_sigma;
  j["saturation_fraction"] = m.saturation_fraction;
  j["control_steps"] = m.control_steps;
  j["saturated_steps"] = m.saturated_steps;
  j["controller"] = m.controller;
  return j;
}

LogMetadata metadata_from_json(const Json& j) {
  LogMetadata m;
  m.period = get_number(j.at("period"));
  m.cycles = j.at("cycles").get<int>();
  m.sample_rate = get_number(j.at("sample_rate"));
  m.control_period = get_number(j.value("control_period", Json(m.control_period)));
  m.convention = input_convention_from_string(j.value("convention", std::string("zoh")));
  m.seed = j.value("seed", std::uint64_t{0});
  m.noise_seed = j.value("noise_seed", std::uint64_t{0});
  m.position_sigma = get_number(j.value("position_sigma", Json(0.0)));
  m.angle_sigma = get_number(j.value("angle_sigma", Json(0.0)));
  m.saturation_fraction = get_number(j.value("saturation_fraction", Json(0.0)));
  m.control_steps = j.value("control_steps", 0);
  m.saturated_steps = j.value("saturated_steps", 0);
  m.controller = j.value("controller", std::string());
  return m;
}

namespace {

const std::vector<std::string> kLogHeader = {"t",  "x",  "y",  "z",  "phi", "theta", "psi",     "u1",
                                             "u2", "u3", "u4", "u5", "u6",  "sat_flag"};

}  // namespace

void save_log(const fs::path& csv_path, const MeasurementLog& log) {
  CsvTable table;
  table.header = kLogHeader;
  table.rows.reserve(log.size());
  for (std::size_t r = 0; r < log.size(); ++r) {
    std::vector<double> row(14);
    row[0] = log.t[r];
    for (int c = 0; c < 6; ++c) row[1 + c] = log.pose(r, c);
    for (int c = 0; c < 6; ++c) row[7 + c] = log.u(r, c);
    row[13] = log.saturated[r];
    table.rows.push_back(std::move(row));
  }
  write_text_file(csv_path, to_csv(table));
  write_text_file(metadata_path(csv_path), to_json(log.meta).dump(2) + "\n");
}

MeasurementLog load_log(const fs::path& csv_path) {
  const std::string context = "log '" + csv_path.string() + "'";
  const CsvTable table = rethrow_as(ErrorKind::invalid_log, context, [&] { return parse_csv(read_text_file(csv_path)); });
  if (table.header != kLogHeader) throw Error(ErrorKind::invalid_log, context + ": unexpected columns");
  MeasurementLog log;
  const fs::path meta = metadata_path(csv_path);
  if (!fs::exists(meta)) throw Error(ErrorKind::invalid_log, context + ": missing metadata '" + meta.string() + "'");
  log.meta = rethrow_as(ErrorKind::invalid_log, "metadata '" + meta.string() + "'",
                        [&] { return metadata_from_json(Json::parse(read_text_file(meta))); });
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  log.t.resize(rows);
  log.pose.resize(rows, 6);
  log.u.resize(rows, 6);
  log.saturated.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = table.rows[r];
    log.t[r] = row[0];
    for (int c = 0; c < 6; ++c) log.pose(r, c) = row[1 + c];
    for (int c = 0; c < 6; ++c) log.u(r, c) = row[7 + c];
    log.saturated[r] = static_cast<int>(row[13]);
  }
  log.validate();
  return log;
}

Json to_json(const ParameterErrors& e) {
  Json j;
  j["mass_error"] = number(e.mass);
  j["inertia_rmse"] = number(e.inertia_rmse);
  j["offset_error_norm"] = number(e.offset);
  j["mass_relative"] = number(e.mass_relative);
  j["inertia_relative"] = number(e.inertia_relative);
  j["offset_relative"] = number(e.offset_relative);
  return j;
}

ParameterErrors errors_from_json(const Json& j) {
  ParameterErrors e;
  e.mass = get_number(j.at("mass_error"));
  e.inertia_rmse = get_number(j.at("inertia_rmse"));
  e.offset = get_number(j.at("offset_error_norm"));
  e.mass_relative = get_number(j.at("mass_relative"));
  e.inertia_relative = get_number(j.at("inertia_relative"));
  e.offset_relative = get_number(j.at("offset_relative"));
  return e;
}

Json to_json(const EstimationResult& r) {
  Json j;
  j["pi_hat"] = vector_json(r.pi_hat);
  const InertialParams est = InertialParams::from_vector(r.pi_hat);
  j["mass"] = number(est.mass);
  j["com_offset"] = vector_json(est.p_off());
  j["inertia_origin"] = vector_json(est.inertia_c);
  j["n_star"] = r.n_star;
  j["residual_energy"] = number(r.residual_energy);
  j["cond_W"] = number(r.cond_W);
  j["lsq_residual_norm"] = number(r.lsq_residual_norm);
  j["mass_positive"] = r.mass_positive;
  j["inertia_positive_definite"] = r.inertia_positive_definite;
  if (r.errors) j["errors"] = to_json(*r.errors);
  j["sweep"] = Json::array();
  for (const auto& c : r.selection.candidates) {
    Json s;
    s["n"] = c.n;
    s["residual"] = number(c.residual());
    s["physical"] = c.physical;
    s["rank"] = c.rank;
    s["cond_W"] = number(c.cond_W);
    s["lsq_residual_norm"] = number(c.lsq_residual_norm);
    s["pi_hat"] = vector_json(c.pi_hat);
    if (!c.failure.empty()) s["failure"] = c.failure;
    if (c.failure_kind) s["failure_kind"] = static_cast<int>(*c.failure_kind);
    if (c.errors) s["errors"] = to_json(*c.errors);
    j["sweep"].push_back(s);
  }
  return j;
}

EstimationResult result_from_json(const Json& j) {
  EstimationResult r;
  r.pi_hat = vector_from_json(j.at("pi_hat"), 10);
  r.n_star = j.at("n_star").get<int>();
  r.residual_energy = get_number(j.at("residual_energy"));
  r.cond_W = get_number(j.at("cond_W"));
  r.lsq_residual_norm = get_number(j.at("lsq_residual_norm"));
  r.mass_positive = j.at("mass_positive").get<bool>();
  r.inertia_positive_definite = j.at("inertia_positive_definite").get<bool>();
  if (j.contains("errors")) r.errors = errors_from_json(j.at("errors"));
  r.selection.n_star = r.n_star;
  for (const auto& s : j.at("sweep")) {
    HarmonicCandidate c;
    c.n = s.at("n").get<int>();
    c.energy.residual = get_number(s.at("residual"));
    c.physical = s.at("physical").get<bool>();
    c.rank = s.at("rank").get<int>();
    c.cond_W = get_number(s.at("cond_W"));
    c.lsq_residual_norm = get_number(s.at("lsq_residual_norm"));
    c.pi_hat = vector_from_json(s.at("pi_hat"), 10);
    c.failure = s.value("failure", std::string());
    if (s.contains("failure_kind")) c.failure_kind = static_cast<ErrorKind>(s.at("failure_kind").get<int>());
    if (s.contains("errors")) c.errors = errors_from_json(s.at("errors"));
    r.selection.candidates.push_back(std::move(c));
  }
  return r;
}

void save_result(const fs::path& path, const EstimationResult& r) {
  write_text_file(path, to_json(r).dump(2) + "\n");
}

EstimationResult load_result(const fs::path& path) {
  const std::string text = read_text_file(path);
  return rethrow_as(ErrorKind::invalid_input, "result '" + path.string() + "'",
                    [&] { return result_from_json(Json::parse(text)); });
}

CsvTable sweep_table(const HarmonicSelection& sel) {
  CsvTable t;
  t.header = {"n",          "residual",     "physical",          "rank",           "cond_W",
              "mass_error", "inertia_rmse", "offset_error_norm", "composite_error"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : sel.candidates) {
    const bool e = c.errors.has_value();
    t.rows.push_back({static_cast<double>(c.n), c.residual(), c.physical ? 1.0 : 0.0, static_cast<double>(c.rank),
                      c.cond_W, e ? c.errors->mass : nan, e ? c.errors->inertia_rmse : nan,
                      e ? c.errors->offset : nan, e ? c.errors->composite() : nan});
  }
  return t;
}

CsvTable energy_table(const EnergyTrace& trace) {
  CsvTable t;
  t.header = {"t", "P", "Tdot"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    t.rows.push_back({trace.t[i], trace.P[i], i < trace.Tdot.size() ? trace.Tdot[i] : nan});
  }
  return t;
}

CsvTable tracking_table(const MeasurementLog& log, const FourierTrajectory& reference) {
  CsvTable t;
  t.header = {"t",     "ref_x", "ref_y", "ref_z", "ref_phi", "ref_theta", "ref_psi",
              "x",     "y",     "z",     "phi",   "theta",   "psi"};
  for (std::size_t r = 0; r < log.size(); ++r) {
    const Vec6 ref = eval(reference, log.t[r]).X;
    std::vector<double> row(13);
    row[0] = log.t[r];
    for (int c = 0; c < 6; ++c) row[1 + c] = ref(c);
    for (int c = 0; c < 6; ++c) row[7 + c] = log.pose(r, c);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void save_table(const fs::path& path, const CsvTable& table) { write_text_file(path, to_csv(table)); }

CsvTable load_table(const fs::path& path) { return parse_csv(read_text_file(path)); }

}  // namespace ffid
