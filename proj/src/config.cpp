#include "psgla/config.h"

#include <set>

#include "psgla/errors.h"

namespace psgla {

namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Reads the members of one JSON object, tracking which keys were consumed.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    return v.get<double>();
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(path(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback,
                     const std::set<std::string>& allowed) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    std::string s = v.get<std::string>();
    if (!allowed.count(s)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(path(key), "unknown value \"" + s + "\" (expected one of " + list + ")");
    }
    return s;
  }

  // Number, or the string "auto" (returned as nullopt).
  std::optional<double> number_or_auto(const std::string& key, std::optional<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
    if (!v.is_number()) throw ConfigError(path(key), "expected a number or \"auto\"");
    return v.get<double>();
  }

  std::optional<double> number_or_null(const std::string& key, std::optional<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw ConfigError(path(key), "expected a number or null");
    return v.get<double>();
  }

  Vector vector(const std::string& key, const Vector& fallback) {
    if (!has(key)) return fallback;
    return to_vector(raw(key), path(key));
  }

  Matrix matrix(const std::string& key, const Matrix& fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    const std::string p = path(key);
    if (!v.is_array()) throw ConfigError(p, "expected an array of rows");
    if (v.empty()) return Matrix(0, 0);
    const Eigen::Index cols = v[0].is_array() ? static_cast<Eigen::Index>(v[0].size()) : 0;
    Matrix m(static_cast<Eigen::Index>(v.size()), cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string pi = p + "[" + std::to_string(i) + "]";
      Vector row = to_vector(v[i], pi);
      if (row.size() != cols) throw ConfigError(pi, "rows must have equal length");
      m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
  }

  Reader child(const std::string& key) {
    static const Json empty = Json::object();
    if (!has(key)) return Reader(empty, path(key));
    return Reader(raw(key), path(key));
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(path(item.key()), "unknown field");
    }
  }

  static Vector to_vector(const Json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError(p, "expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(p + "[" + std::to_string(i) + "]", "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

Json auto_json(const std::optional<double>& v) { return v ? Json(*v) : Json("auto"); }
Json null_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

BodySpec parse_body(Reader r) {
  BodySpec b;
  b.kind = r.string("kind", b.kind, {"ball", "box", "polytope"});
  if (b.kind == "ball") {
    b.center = r.vector("center", Vector());
    b.radius = r.number("radius", b.radius);
    require(b.center.size() > 0, r.path("center"), "required for a ball");
  } else if (b.kind == "box") {
    b.lower = r.vector("lower", Vector());
    b.upper = r.vector("upper", Vector());
    require(b.lower.size() > 0, r.path("lower"), "required for a box");
    require(b.upper.size() == b.lower.size(), r.path("upper"), "must match the length of lower");
  } else {
    b.A = r.matrix("A", Matrix());
    b.b = r.vector("b", Vector());
    b.diameter = r.number("diameter", 0.0);
    b.inradius = r.number("inradius", 0.0);
    require(b.A.rows() > 0, r.path("A"), "required for a polytope");
    require(b.b.size() == b.A.rows(), r.path("b"), "must have one entry per row of A");
  }
  r.finish();
  return b;
}

Json body_json(const BodySpec& b) {
  Json j;
  j["kind"] = b.kind;
  if (b.kind == "ball") {
    j["center"] = vector_json(b.center);
    j["radius"] = b.radius;
  } else if (b.kind == "box") {
    j["lower"] = vector_json(b.lower);
    j["upper"] = vector_json(b.upper);
  } else {
    j["A"] = matrix_json(b.A);
    j["b"] = vector_json(b.b);
    j["diameter"] = b.diameter;
    j["inradius"] = b.inradius;
  }
  return j;
}

NoiseSpec parse_noise(Reader r) {
  NoiseSpec n;
  n.kind = r.string("kind", n.kind, {"zero", "gaussian", "uniform", "data"});
  if (n.kind == "gaussian") {
    n.sigma = r.number("sigma", n.sigma);
    require(n.sigma >= 0.0, r.path("sigma"), "must be >= 0");
  } else if (n.kind == "uniform") {
    n.halfwidth = r.number("halfwidth", n.halfwidth);
    require(n.halfwidth >= 0.0, r.path("halfwidth"), "must be >= 0");
  } else if (n.kind == "data") {
    n.rows = r.matrix("rows", Matrix());
    require(n.rows.rows() > 0, r.path("rows"), "required for data noise");
  }
  r.finish();
  return n;
}

Json noise_json(const NoiseSpec& n) {
  Json j;
  j["kind"] = n.kind;
  if (n.kind == "gaussian") j["sigma"] = n.sigma;
  if (n.kind == "uniform") j["halfwidth"] = n.halfwidth;
  if (n.kind == "data") j["rows"] = matrix_json(n.rows);
  return j;
}

LossSpec parse_loss(Reader r) {
  LossSpec l;
  l.kind = r.string("kind", l.kind, {"quadratic", "double_well", "linear", "trigonometric"});
  if (l.kind == "quadratic") {
    l.curvature = r.number("curvature", l.curvature);
  } else if (l.kind == "linear") {
    l.coefficients = r.vector("coefficients", Vector());
    require(l.coefficients.size() > 0, r.path("coefficients"), "required for a linear loss");
  } else if (l.kind == "trigonometric") {
    l.terms = static_cast<int>(r.integer("terms", l.terms));
    l.max_frequency = r.number("max_frequency", l.max_frequency);
    l.amplitude = r.number("amplitude", l.amplitude);
    l.seed = r.unsigned_integer("seed", l.seed);
    l.known_minimum = r.number_or_null("known_minimum", l.known_minimum);
    require(l.terms >= 1, r.path("terms"), "must be >= 1");
  }
  l.noise = parse_noise(r.child("noise"));
  r.finish();
  return l;
}

Json loss_json(const LossSpec& l) {
  Json j;
  j["kind"] = l.kind;
  if (l.kind == "quadratic") j["curvature"] = l.curvature;
  if (l.kind == "linear") j["coefficients"] = vector_json(l.coefficients);
  if (l.kind == "trigonometric") {
    j["terms"] = l.terms;
    j["max_frequency"] = l.max_frequency;
    j["amplitude"] = l.amplitude;
    j["seed"] = l.seed;
    j["known_minimum"] = null_json(l.known_minimum);
  }
  j["noise"] = noise_json(l.noise);
  return j;
}

SamplerSpec parse_sampler(Reader r) {
  SamplerSpec s;
  s.eta = r.number_or_auto("eta", s.eta);
  s.beta = r.number_or_auto("beta", s.beta);
  s.steps = r.integer("steps", s.steps);
  s.chains = static_cast<int>(r.integer("chains", s.chains));
  s.substeps = static_cast<int>(r.integer("substeps", s.substeps));
  s.init = r.string("init", s.init, {"origin", "uniform"});
  if (r.has("x0") && !r.raw("x0").is_null()) {
    s.x0 = r.vector("x0", Vector());
  } else if (r.has("x0")) {
    r.raw("x0");
  }
  require(!s.eta || *s.eta > 0.0, r.path("eta"), "must be positive");
  require(!s.beta || *s.beta > 0.0, r.path("beta"), "must be positive");
  require(s.steps >= 0, r.path("steps"), "must be >= 0");
  require(s.chains >= 1, r.path("chains"), "must be >= 1");
  require(s.substeps >= 1, r.path("substeps"), "must be >= 1");
  r.finish();
  return s;
}

Json sampler_json(const SamplerSpec& s) {
  Json j;
  j["eta"] = auto_json(s.eta);
  j["beta"] = auto_json(s.beta);
  j["steps"] = s.steps;
  j["chains"] = s.chains;
  j["substeps"] = s.substeps;
  j["init"] = s.init;
  j["x0"] = s.x0 ? vector_json(*s.x0) : Json(nullptr);
  return j;
}

ConvergeSpec parse_converge(Reader r) {
  ConvergeSpec c;
  if (r.has("checkpoints")) {
    const Json& v = r.raw("checkpoints");
    const std::string p = r.path("checkpoints");
    require(v.is_array() && !v.empty(), p, "expected a non-empty array of integers");
    c.checkpoints.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      require(v[i].is_number_integer(), p + "[" + std::to_string(i) + "]", "expected an integer");
      c.checkpoints.push_back(v[i].get<long>());
    }
  }
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    const std::string p = r.path("checkpoints") + "[" + std::to_string(i) + "]";
    require(c.checkpoints[i] >= 4, p, "checkpoints must be >= 4");
    require(i == 0 || c.checkpoints[i] > c.checkpoints[i - 1], p, "checkpoints must be strictly increasing");
  }
  c.ground_truth = r.integer("ground_truth", c.ground_truth);
  c.bootstrap = static_cast<int>(r.integer("bootstrap", c.bootstrap));
  c.confidence = r.number("confidence", c.confidence);
  c.max_exponent = r.number("max_exponent", c.max_exponent);
  c.directions = static_cast<int>(r.integer("directions", c.directions));
  require(c.ground_truth >= 1, r.path("ground_truth"), "must be >= 1");
  require(c.bootstrap >= 2, r.path("bootstrap"), "must be >= 2");
  require(c.confidence > 0.0 && c.confidence < 1.0, r.path("confidence"), "must be in (0, 1)");
  require(c.directions >= 32, r.path("directions"), "must be >= 32");
  r.finish();
  return c;
}

Json converge_json(const ConvergeSpec& c) {
  Json j;
  j["checkpoints"] = c.checkpoints;
  j["ground_truth"] = c.ground_truth;
  j["bootstrap"] = c.bootstrap;
  j["confidence"] = c.confidence;
  j["max_exponent"] = c.max_exponent;
  j["directions"] = c.directions;
  return j;
}

CoupleSpec parse_couple(Reader r) {
  CoupleSpec c;
  c.replicates = r.integer("replicates", c.replicates);
  c.horizon = r.integer("horizon", c.horizon);
  c.kind = r.string("kind", c.kind, {"reflection", "reflection_maximal"});
  c.grid_points = static_cast<int>(r.integer("grid_points", c.grid_points));
  c.bootstrap = static_cast<int>(r.integer("bootstrap", c.bootstrap));
  c.confidence = r.number("confidence", c.confidence);
  c.identical_start = r.boolean("identical_start", c.identical_start);
  c.a = r.number_or_auto("a", c.a);
  c.distance_ratio = r.number_or_null("distance_ratio", c.distance_ratio);
  c.keep_distances = r.boolean("keep_distances", c.keep_distances);
  require(c.replicates >= 1000, r.path("replicates"), "must be >= 1000");
  require(c.grid_points >= 2, r.path("grid_points"), "must be >= 2");
  require(c.horizon >= c.grid_points - 1, r.path("horizon"), "must be >= grid_points - 1");
  require(c.bootstrap >= 2, r.path("bootstrap"), "must be >= 2");
  require(c.confidence > 0.0 && c.confidence < 1.0, r.path("confidence"), "must be in (0, 1)");
  require(!c.a || *c.a >= 0.0, r.path("a"), "must be >= 0");
  r.finish();
  return c;
}

Json couple_json(const CoupleSpec& c) {
  Json j;
  j["replicates"] = c.replicates;
  j["horizon"] = c.horizon;
  j["kind"] = c.kind;
  j["grid_points"] = c.grid_points;
  j["bootstrap"] = c.bootstrap;
  j["confidence"] = c.confidence;
  j["identical_start"] = c.identical_start;
  j["a"] = auto_json(c.a);
  j["distance_ratio"] = null_json(c.distance_ratio);
  j["keep_distances"] = c.keep_distances;
  return j;
}

TuneSpec parse_tune(Reader r) {
  TuneSpec t;
  t.epsilon = r.number("epsilon", t.epsilon);
  t.lambda = r.number("lambda", t.lambda);
  t.delta = r.number("delta", t.delta);
  // rho = 4 / (1 - 2 delta) and zeta = 1 / lambda override delta and lambda.
  if (r.has("rho")) {
    const double rho = r.number("rho", 0.0);
    require(rho > 4.0, r.path("rho"), "must exceed 4");
    t.delta = 0.5 * (1.0 - 4.0 / rho);
  }
  if (r.has("zeta")) {
    const double zeta = r.number("zeta", 0.0);
    require(zeta > 1.0, r.path("zeta"), "must exceed 1");
    t.lambda = 1.0 / zeta;
  }
  t.max_steps = r.integer("max_steps", t.max_steps);
  t.run = r.boolean("run", t.run);
  t.chains = static_cast<int>(r.integer("chains", t.chains));
  t.ground_truth = r.integer("ground_truth", t.ground_truth);
  t.bootstrap = static_cast<int>(r.integer("bootstrap", t.bootstrap));
  require(t.epsilon > 0.0, r.path("epsilon"), "must be positive");
  require(t.lambda > 0.0 && t.lambda < 1.0, r.path("lambda"), "must be in (0, 1)");
  require(t.delta > 0.0 && t.delta < 0.5, r.path("delta"), "must be in (0, 1/2)");
  require(t.max_steps >= 4, r.path("max_steps"), "must be >= 4");
  require(t.chains >= 1, r.path("chains"), "must be >= 1");
  require(t.ground_truth >= 1, r.path("ground_truth"), "must be >= 1");
  require(t.bootstrap >= 2, r.path("bootstrap"), "must be >= 2");
  r.finish();
  return t;
}

Json tune_json(const TuneSpec& t) {
  Json j;
  j["epsilon"] = t.epsilon;
  j["lambda"] = t.lambda;
  j["delta"] = t.delta;
  j["max_steps"] = t.max_steps;
  j["run"] = t.run;
  j["chains"] = t.chains;
  j["ground_truth"] = t.ground_truth;
  j["bootstrap"] = t.bootstrap;
  return j;
}

int spec_dim(const BodySpec& b) {
  if (b.kind == "ball") return static_cast<int>(b.center.size());
  if (b.kind == "box") return static_cast<int>(b.lower.size());
  return static_cast<int>(b.A.cols());
}

}  // namespace

ExperimentConfig parse_config(const Json& input) {
  const Json& j = input.is_object() && input.contains("config") ? input.at("config") : input;
  Reader r(j, "");
  ExperimentConfig c;
  c.experiment = r.string("experiment", c.experiment, {"sample", "converge", "couple", "constants", "tune"});
  c.seed = r.unsigned_integer("seed", c.seed);
  if (!r.has("body")) throw ConfigError("body", "required");
  if (!r.has("loss")) throw ConfigError("loss", "required");
  c.body = parse_body(r.child("body"));
  c.loss = parse_loss(r.child("loss"));
  c.sampler = parse_sampler(r.child("sampler"));
  c.converge = parse_converge(r.child("converge"));
  c.couple = parse_couple(r.child("couple"));
  c.tune = parse_tune(r.child("tune"));
  r.finish();

  const int n = spec_dim(c.body);
  if (c.loss.kind == "linear" && c.loss.coefficients.size() != n) {
    throw ConfigError("loss.coefficients", "length must equal the body dimension");
  }
  if (c.loss.noise.kind == "data" && c.loss.noise.rows.cols() != n) {
    throw ConfigError("loss.noise.rows", "row length must equal the body dimension");
  }
  if (c.sampler.x0 && c.sampler.x0->size() != n) {
    throw ConfigError("sampler.x0", "length must equal the body dimension");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_json(path)); }

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["body"] = body_json(c.body);
  j["loss"] = loss_json(c.loss);
  j["sampler"] = sampler_json(c.sampler);
  j["converge"] = converge_json(c.converge);
  j["couple"] = couple_json(c.couple);
  j["tune"] = tune_json(c.tune);
  return j;
}

ConvexBody build_body(const BodySpec& spec) {
  try {
    if (spec.kind == "ball") return ConvexBody::ball(spec.center, spec.radius);
    if (spec.kind == "box") return ConvexBody::box(spec.lower, spec.upper);
    return ConvexBody::polytope(spec.A, spec.b, spec.diameter, spec.inradius);
  } catch (const InputError& e) {
    throw ConfigError("body", e.what());
  } catch (const InvariantError& e) {
    throw ConfigError("body", e.what());
  }
}

LossPtr build_loss(const LossSpec& spec, const ConvexBody& body) {
  const int n = body.dim();
  try {
    NoiseModel noise = NoiseModel::zero(n);
    if (spec.noise.kind == "gaussian") noise = NoiseModel::gaussian(n, spec.noise.sigma);
    if (spec.noise.kind == "uniform") noise = NoiseModel::bounded_uniform(n, spec.noise.halfwidth);
    if (spec.noise.kind == "data") noise = NoiseModel::data_driven(spec.noise.rows);
    if (spec.kind == "quadratic") return make_quadratic(body, spec.curvature, std::move(noise));
    if (spec.kind == "double_well") return make_double_well(body, std::move(noise));
    if (spec.kind == "linear") return make_linear(body, spec.coefficients, std::move(noise));
    return make_trigonometric(body, spec.terms, spec.max_frequency, spec.amplitude, spec.seed,
                              std::move(noise), spec.known_minimum);
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError("loss", e.what());
  }
}

}  // namespace psgla
