#include "ampc/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <set>
#include <sstream>

#include "ampc/error.hpp"

namespace ampc {

namespace {

using nlohmann::json;

// Object reader that rejects unknown keys and reports full field paths.
class Fields {
public:
  Fields(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j_.items()) {
      if (!ok.count(key)) throw InputError("config: unknown field '" + at(key) + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key, std::optional<double> fallback = {}) const {
    if (!has(key)) return required(key, fallback);
    if (!j_.at(key).is_number()) throw InputError("config: '" + at(key) + "' must be a number");
    return j_.at(key).get<double>();
  }
  std::int64_t integer(const char* key, std::optional<std::int64_t> fallback = {}) const {
    if (!has(key)) return required(key, fallback);
    if (!j_.at(key).is_number_integer()) throw InputError("config: '" + at(key) + "' must be an integer");
    return j_.at(key).get<std::int64_t>();
  }
  std::uint64_t seed(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw InputError("config: '" + at(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw InputError("config: '" + at(key) + "' must be a boolean");
    return j_.at(key).get<bool>();
  }
  std::string string(const char* key, std::optional<std::string> fallback = {}) const {
    if (!has(key)) return required(key, fallback);
    if (!j_.at(key).is_string()) throw InputError("config: '" + at(key) + "' must be a string");
    return j_.at(key).get<std::string>();
  }
  Eigen::VectorXd vector(const char* key) const {
    const auto& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw InputError("config: '" + at(key) + "' must be a non-empty array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw InputError("config: '" + at(key) + "' must contain numbers");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("config: '" + (path_.empty() ? std::string("<root>") : path_) + "' " + what);
  }

private:
  template <class T>
  T required(const char* key, const std::optional<T>& fallback) const {
    if (!fallback) throw InputError("config: missing required field '" + at(key) + "'");
    return *fallback;
  }

  const json& j_;
  std::string path_;
};

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<Point2> grid_from(const Fields& f, int default_n, double default_lo, double default_hi) {
  const auto n = f.integer("sensors_per_side", default_n);
  if (n < 2) throw InputError("config: '" + f.at("sensors_per_side") + "' must be at least 2");
  return sensor_grid(static_cast<int>(n), f.number("sensor_lower", default_lo),
                     f.number("sensor_upper", default_hi));
}

void validate_model(const json& j) {
  // Building the model performs every check; construction is cheap.
  build_model(j);
}

PriorSpec parse_prior(const json& j) {
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      Fields f(j[i], "prior[" + std::to_string(i) + "]", {"kind", "lower", "upper", "mean", "sd"});
      f.string("kind");
    }
  } else {
    Fields f(j, "prior", {"kind", "dim", "lower", "upper", "mean", "sd"});
    f.string("kind");
    f.integer("dim");
  }
  return prior_spec_from_json(j);
}

NoiseConfig parse_noise(const json& j) {
  NoiseConfig n;
  if (j.is_null()) return n;
  Fields f(j, "noise", {"type", "sigma", "shape", "scale"});
  const auto type = f.string("type");
  if (type == "known") {
    n.kind = f.has("sigma") ? NoiseConfig::Kind::Known : NoiseConfig::Kind::FromData;
    if (f.has("sigma")) {
      n.sigma = f.number("sigma");
      if (!(n.sigma > 0.0)) throw InputError("config: 'noise.sigma' must be positive");
    }
  } else if (type == "from_data") {
    n.kind = NoiseConfig::Kind::FromData;
  } else if (type == "hierarchical") {
    n.kind = NoiseConfig::Kind::Hierarchical;
    n.shape = f.number("shape", 1e-3);
    n.scale = f.number("scale", 1e-3);
    if (!(n.shape > 0.0) || !(n.scale > 0.0)) {
      throw InputError("config: inverse-gamma shape and scale must be positive");
    }
  } else {
    throw InputError("config: 'noise.type' must be known, from_data or hierarchical");
  }
  return n;
}

DataConfig parse_data(const json& j) {
  Fields f(j, "data", {"file", "synthetic"});
  DataConfig d;
  if (f.has("file") == f.has("synthetic")) {
    throw InputError("config: 'data' needs exactly one of 'file' or 'synthetic'");
  }
  if (f.has("file")) {
    d.file = f.string("file");
    return d;
  }
  Fields s(f.raw("synthetic"), "data.synthetic", {"true_params", "truth_draw", "noise", "fine_factor", "seed"});
  SyntheticConfig syn;
  if (s.has("true_params") == s.has("truth_draw")) {
    throw InputError("config: 'data.synthetic' needs exactly one of 'true_params' or 'truth_draw'");
  }
  if (s.has("true_params")) {
    syn.true_params = s.vector("true_params");
  } else {
    Fields t(s.raw("truth_draw"), "data.synthetic.truth_draw", {"lower", "upper", "seed"});
    syn.draw_lower = t.number("lower");
    syn.draw_upper = t.number("upper");
    syn.draw_seed = t.seed("seed", 0);
    if (!(syn.draw_upper > syn.draw_lower)) throw InputError("config: truth_draw needs upper > lower");
  }
  Fields n(s.raw("noise"), "data.synthetic.noise", {"type", "sigma", "delta"});
  const auto type = n.string("type");
  if (type == "gaussian") {
    syn.noise = NoiseSpec::gaussian(n.number("sigma"));
  } else if (type == "relative_max") {
    syn.noise = NoiseSpec::relative_max(n.number("delta"));
  } else {
    throw InputError("config: 'data.synthetic.noise.type' must be gaussian or relative_max");
  }
  if (syn.noise.level < 0.0) throw InputError("config: synthetic noise level must be non-negative");
  syn.fine_factor = static_cast<int>(s.integer("fine_factor", 2));
  if (syn.fine_factor < 1) throw InputError("config: 'data.synthetic.fine_factor' must be at least 1");
  syn.seed = s.seed("seed", 0);
  d.synthetic = syn;
  return d;
}

MethodConfig parse_method(const json& j) {
  Fields f(j, "method", {"name", "N", "N_C", "epsilon", "epsilon0", "R", "rho", "m", "I_max", "n_steps",
                         "step", "steps", "burn_in", "surrogate_file", "start", "start_log_sigma2"});
  MethodConfig m;
  const auto name = f.string("name");
  if (name == "direct") {
    m.kind = Method::Direct;
  } else if (name == "prior_pc") {
    m.kind = Method::PriorPc;
  } else if (name == "ampc") {
    m.kind = Method::Ampc;
  } else {
    throw InputError("config: 'method.name' must be direct, prior_pc or ampc");
  }
  AmpcConfig& a = m.ampc;
  a.order = static_cast<int>(f.integer("N", 3));
  a.correction_order = static_cast<int>(f.integer("N_C", 2));
  // "infinity" disables refinement.
  if (f.has("epsilon") && f.raw("epsilon").is_string()) {
    if (f.raw("epsilon").get<std::string>() != "infinity") {
      throw InputError("config: 'method.epsilon' must be a number or \"infinity\"");
    }
    a.epsilon = AmpcConfig::kNoRefinement;
  } else {
    a.epsilon = f.number("epsilon", 1e-3);
  }
  a.epsilon0 = f.number("epsilon0", 0.1);
  a.radius = f.number("R", 0.1);
  a.rho = f.number("rho", 0.5);
  a.subchain_length = static_cast<int>(f.integer("m", 5000));
  a.max_iterations = static_cast<int>(f.integer("I_max", 10));
  if (a.order < 0) throw InputError("config: 'method.N' must be non-negative");
  if (m.kind == Method::Ampc) a.validate();
  m.n_steps = f.integer("n_steps", 50000);
  if (m.n_steps < 1) throw InputError("config: 'method.n_steps' must be positive");
  if (f.has("step") && f.has("steps")) throw InputError("config: give 'method.step' or 'method.steps', not both");
  if (f.has("step")) m.steps = Eigen::VectorXd::Constant(1, f.number("step"));
  if (f.has("steps")) m.steps = f.vector("steps");
  m.burn_in = f.number("burn_in", 0.4);
  if (!(m.burn_in >= 0.0 && m.burn_in < 1.0)) throw InputError("config: 'method.burn_in' must lie in [0, 1)");
  if (f.has("surrogate_file")) {
    if (m.kind == Method::Direct) throw InputError("config: 'method.surrogate_file' is not used by direct");
    m.surrogate_file = f.string("surrogate_file");
  }
  if (f.has("start")) m.start = f.vector("start");
  m.start_log_sigma2 = f.number("start_log_sigma2", 0.0);
  return m;
}

} // namespace

std::string_view to_string(Method method) {
  switch (method) {
  case Method::Direct: return "direct";
  case Method::PriorPc: return "prior_pc";
  case Method::Ampc: return "ampc";
  }
  return "unknown";
}

std::shared_ptr<const ForwardModel> build_model(const json& j) {
  if (!j.is_object()) throw InputError("config: 'model' must be an object");
  const std::string type = j.value("type", "");
  if (type == "fractional_source") {
    Fields f(j, "model", {"type", "preset", "alpha", "mesh", "dt", "source_width", "amplitude",
                          "sensors_per_side", "sensor_lower", "sensor_upper", "times", "infer_alpha"});
    const auto preset = f.string("preset", "known_alpha");
    FractionalSourceConfig c;
    if (preset == "known_alpha") {
      c = FractionalSourceConfig::known_alpha();
    } else if (preset == "unknown_alpha") {
      c = FractionalSourceConfig::unknown_alpha();
    } else {
      throw InputError("config: 'model.preset' must be known_alpha or unknown_alpha");
    }
    c.alpha = f.number("alpha", c.alpha);
    c.mesh = static_cast<int>(f.integer("mesh", c.mesh));
    c.dt = f.number("dt", c.dt);
    c.source_width = f.number("source_width", c.source_width);
    c.amplitude = f.number("amplitude", c.amplitude);
    if (f.has("sensors_per_side")) c.sensors = grid_from(f, 3, 0.0, 1.0);
    if (f.has("times")) {
      const Eigen::VectorXd t = f.vector("times");
      c.times.assign(t.data(), t.data() + t.size());
    }
    c.infer_alpha = f.boolean("infer_alpha", c.infer_alpha);
    return std::make_shared<FractionalSourceModel>(c);
  }
  if (type == "elliptic_rbf") {
    Fields f(j, "model", {"type", "mesh", "rbf_width", "source_amplitude", "sensors_per_side", "sensor_lower",
                          "sensor_upper"});
    EllipticRbfConfig c;
    c.mesh = static_cast<int>(f.integer("mesh", c.mesh));
    c.rbf_width = f.number("rbf_width", c.rbf_width);
    c.source_amplitude = f.number("source_amplitude", c.source_amplitude);
    if (f.has("sensors_per_side")) c.sensors = grid_from(f, 9, 0.1, 0.9);
    return std::make_shared<EllipticRbfModel>(c);
  }
  if (type == "linear") {
    Fields f(j, "model", {"type", "matrix", "offset"});
    const auto& rows = f.raw("matrix");
    if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
      throw InputError("config: 'model.matrix' must be a non-empty array of rows");
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != rows[0].size()) {
        throw InputError("config: 'model.matrix' rows must have equal length");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        if (!rows[r][c].is_number()) throw InputError("config: 'model.matrix' must contain numbers");
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
      }
    }
    const Eigen::VectorXd c = f.has("offset") ? f.vector("offset") : Eigen::VectorXd::Zero(a.rows());
    return make_linear_model(a, c);
  }
  if (type == "exp_sum") {
    Fields f(j, "model", {"type", "n_z", "scale"});
    const auto n_z = f.integer("n_z");
    if (n_z < 1) throw InputError("config: 'model.n_z' must be positive");
    return make_exp_sum_model(static_cast<int>(n_z), f.number("scale", 1.0));
  }
  throw InputError("config: 'model.type' must be fractional_source, elliptic_rbf, linear or exp_sum");
}

RunConfig parse_run_config(const json& j) {
  Fields f(j, "", {"schema_version", "model", "prior", "noise", "data", "method", "output_dir", "seed"});
  RunConfig c;
  c.schema_version = static_cast<int>(f.integer("schema_version"));
  if (c.schema_version != kConfigSchemaVersion) {
    throw InputError("config: unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                     std::to_string(kConfigSchemaVersion) + ")");
  }
  if (!f.has("model")) throw InputError("config: missing required field 'model'");
  validate_model(f.raw("model"));
  c.model = f.raw("model");
  if (!f.has("prior")) throw InputError("config: missing required field 'prior'");
  c.prior = parse_prior(f.raw("prior"));
  c.noise = f.has("noise") ? parse_noise(f.raw("noise")) : NoiseConfig{};
  if (!f.has("data")) throw InputError("config: missing required field 'data'");
  c.data = parse_data(f.raw("data"));
  if (!f.has("method")) throw InputError("config: missing required field 'method'");
  c.method = parse_method(f.raw("method"));
  c.output_dir = f.string("output_dir", std::string("ampc_out"));
  c.seed = f.seed("seed", 0);

  const auto model = build_model(c.model);
  if (model->n_params() != c.prior.dimension()) {
    throw InputError("config: prior dimension " + std::to_string(c.prior.dimension()) +
                     " does not match the model's " + std::to_string(model->n_params()) + " parameters");
  }
  if (c.data.synthetic && c.data.synthetic->true_params &&
      c.data.synthetic->true_params->size() != model->n_params()) {
    throw InputError("config: 'data.synthetic.true_params' has the wrong length");
  }
  const int state_dim = c.prior.dimension() + (c.noise.kind == NoiseConfig::Kind::Hierarchical ? 1 : 0);
  if (c.method.start && c.method.start->size() != c.prior.dimension()) {
    throw InputError("config: 'method.start' must have one entry per model parameter");
  }
  if (c.method.steps && c.method.steps->size() != 1 && c.method.steps->size() != state_dim) {
    throw InputError("config: 'method.steps' must have 1 or " + std::to_string(state_dim) + " entries");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["model"] = c.model;
  j["prior"] = to_json(c.prior);
  switch (c.noise.kind) {
  case NoiseConfig::Kind::Known: j["noise"] = {{"type", "known"}, {"sigma", c.noise.sigma}}; break;
  case NoiseConfig::Kind::FromData: j["noise"] = {{"type", "from_data"}}; break;
  case NoiseConfig::Kind::Hierarchical:
    j["noise"] = {{"type", "hierarchical"}, {"shape", c.noise.shape}, {"scale", c.noise.scale}};
    break;
  }
  if (c.data.file) {
    j["data"] = {{"file", *c.data.file}};
  } else {
    const SyntheticConfig& s = *c.data.synthetic;
    json syn;
    if (s.true_params) {
      syn["true_params"] = vector_json(*s.true_params);
    } else {
      syn["truth_draw"] = {{"lower", s.draw_lower}, {"upper", s.draw_upper}, {"seed", s.draw_seed}};
    }
    if (s.noise.kind == NoiseSpec::Kind::Gaussian) {
      syn["noise"] = {{"type", "gaussian"}, {"sigma", s.noise.level}};
    } else {
      syn["noise"] = {{"type", "relative_max"}, {"delta", s.noise.level}};
    }
    syn["fine_factor"] = s.fine_factor;
    syn["seed"] = s.seed;
    j["data"] = {{"synthetic", syn}};
  }
  const MethodConfig& m = c.method;
  json mj = {{"name", std::string(to_string(m.kind))},
             {"N", m.ampc.order},
             {"N_C", m.ampc.correction_order},
             {"epsilon0", m.ampc.epsilon0},
             {"R", m.ampc.radius},
             {"rho", m.ampc.rho},
             {"m", m.ampc.subchain_length},
             {"I_max", m.ampc.max_iterations},
             {"n_steps", m.n_steps},
             {"burn_in", m.burn_in},
             {"start_log_sigma2", m.start_log_sigma2}};
  if (std::isinf(m.ampc.epsilon)) {
    mj["epsilon"] = "infinity";
  } else {
    mj["epsilon"] = m.ampc.epsilon;
  }
  if (m.steps) mj["steps"] = vector_json(*m.steps);
  if (m.surrogate_file) mj["surrogate_file"] = *m.surrogate_file;
  if (m.start) mj["start"] = vector_json(*m.start);
  j["method"] = mj;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

Eigen::VectorXd synthetic_truth(const SyntheticConfig& s, int n_params) {
  if (s.true_params) return *s.true_params;
  std::mt19937_64 rng(s.draw_seed);
  std::uniform_real_distribution<double> u(s.draw_lower, s.draw_upper);
  Eigen::VectorXd t(n_params);
  for (int i = 0; i < n_params; ++i) t[i] = u(rng);
  return t;
}

LoadedData resolve_data(const RunConfig& config, const ForwardModel& model) {
  LoadedData out;
  if (config.data.file) {
    out.values = read_data_csv(*config.data.file);
    const auto prov = std::filesystem::path(*config.data.file).replace_extension(".provenance.json");
    if (std::filesystem::exists(prov)) {
      std::ifstream in(prov);
      in >> out.provenance;
    }
  } else {
    const SyntheticConfig& s = *config.data.synthetic;
    const Eigen::VectorXd truth = synthetic_truth(s, model.n_params());
    const SyntheticData syn = generate_synthetic_data(model, truth, s.noise, s.fine_factor, s.seed);
    out.values = syn.data;
    out.provenance = {
        {"true_params", vector_json(truth)},
        {"seed", s.seed},
        {"noise", s.noise.kind == NoiseSpec::Kind::Gaussian
                      ? json{{"type", "gaussian"}, {"sigma", s.noise.level}}
                      : json{{"type", "relative_max"}, {"delta", s.noise.level}}},
        {"sigma_effective", syn.sigma_effective},
        {"fine_factor", s.fine_factor},
        {"fine_model", model.refined(s.fine_factor)->id()},
        {"inversion_model", model.id()},
        {"clean", vector_json(syn.clean)},
    };
  }
  if (out.values.size() != model.n_outputs()) {
    throw InputError("data has " + std::to_string(out.values.size()) + " values but the model produces " +
                     std::to_string(model.n_outputs()));
  }
  return out;
}

NoiseModel resolve_noise(const RunConfig& config, const LoadedData& data) {
  switch (config.noise.kind) {
  case NoiseConfig::Kind::Known: return NoiseModel::known(config.noise.sigma);
  case NoiseConfig::Kind::Hierarchical: return NoiseModel::hierarchical(config.noise.shape, config.noise.scale);
  case NoiseConfig::Kind::FromData: break;
  }
  if (!data.provenance.is_object() || !data.provenance.contains("sigma_effective")) {
    throw InputError("noise sigma is not given and the data carry no provenance with sigma_effective");
  }
  const double sigma = data.provenance.at("sigma_effective").get<double>();
  if (!(sigma > 0.0)) throw InputError("data provenance sigma_effective must be positive to use as noise level");
  return NoiseModel::known(sigma);
}

ProposalSpec resolve_proposal(const RunConfig& config, int state_dimension) {
  ProposalSpec p;
  if (config.method.steps) {
    p.steps = config.method.steps->size() == 1
                  ? Eigen::VectorXd::Constant(state_dimension, (*config.method.steps)[0])
                  : *config.method.steps;
  } else {
    p.steps = Eigen::VectorXd::Constant(state_dimension, 0.1);
    const auto& marg = config.prior.marginals();
    for (std::size_t i = 0; i < marg.size(); ++i) {
      p.steps[static_cast<Eigen::Index>(i)] =
          marg[i].kind == PriorMarginal::Kind::Uniform ? 0.05 * (marg[i].b - marg[i].a) : 0.1 * marg[i].b;
    }
  }
  p.validate(state_dimension);
  return p;
}

Eigen::VectorXd resolve_start(const RunConfig& config, int state_dimension) {
  Eigen::VectorXd s(state_dimension);
  const auto& marg = config.prior.marginals();
  for (std::size_t i = 0; i < marg.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (config.method.start) {
      s[k] = (*config.method.start)[k];
    } else {
      s[k] = marg[i].kind == PriorMarginal::Kind::Uniform ? 0.5 * (marg[i].a + marg[i].b) : marg[i].a;
    }
  }
  if (state_dimension > config.prior.dimension()) s[state_dimension - 1] = config.method.start_log_sigma2;
  return s;
}

void write_data_csv(const Eigen::VectorXd& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write data file '" + path + "'");
  out << "index,value\n";
  char buf[64];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(i), data[i]);
    out << buf;
  }
}

Eigen::VectorXd read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read data file '" + path + "'");
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find_first_not_of("0123456789+-.eE,") != std::string::npos) continue; // header
    }
    const auto comma = line.find(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(field, &used));
    } catch (const std::exception&) {
      throw InputError("data file '" + path + "': cannot parse line '" + line + "'");
    }
  }
  if (values.empty()) throw InputError("data file '" + path + "' holds no values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace ampc
