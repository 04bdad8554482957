#include "stabcap/config.hpp"

#include <fstream>
#include <sstream>

namespace stabcap {

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

}  // namespace

bool ConfigView::has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

ConfigView ConfigView::at(const std::string& key) const {
  if (!has(key)) throw InputError("missing config key '" + join_path(path_, key) + "'");
  return ConfigView((*j_)[key], join_path(path_, key));
}

double ConfigView::number(const std::string& key) const {
  const ConfigView v = at(key);
  if (!v.raw().is_number()) throw InputError("config key '" + v.path() + "' must be a number");
  return v.raw().get<double>();
}

double ConfigView::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long long ConfigView::integer(const std::string& key) const {
  const ConfigView v = at(key);
  if (!v.raw().is_number_integer()) throw InputError("config key '" + v.path() + "' must be an integer");
  return v.raw().get<long long>();
}

long long ConfigView::integer_or(const std::string& key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool ConfigView::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigView v = at(key);
  if (!v.raw().is_boolean()) throw InputError("config key '" + v.path() + "' must be a boolean");
  return v.raw().get<bool>();
}

std::string ConfigView::str(const std::string& key) const {
  const ConfigView v = at(key);
  if (!v.raw().is_string()) throw InputError("config key '" + v.path() + "' must be a string");
  return v.raw().get<std::string>();
}

std::string ConfigView::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

std::vector<double> ConfigView::number_list(const std::string& key) const {
  const ConfigView v = at(key);
  if (!v.raw().is_array()) throw InputError("config key '" + v.path() + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v.raw()) {
    if (!e.is_number()) throw InputError("config key '" + v.path() + "' must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<long long> ConfigView::integer_list(const std::string& key) const {
  const ConfigView v = at(key);
  if (!v.raw().is_array()) throw InputError("config key '" + v.path() + "' must be an array of integers");
  std::vector<long long> out;
  for (const auto& e : v.raw()) {
    if (!e.is_number_integer()) throw InputError("config key '" + v.path() + "' must contain integers only");
    out.push_back(e.get<long long>());
  }
  return out;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

namespace {

Distribution parse_distribution(const ConfigView& v) {
  const std::string family = v.str("family");
  if (family == "zero") return Distribution::zero();
  if (family == "point_mass") return Distribution::point_mass(v.number("value"));
  if (family == "uniform") return Distribution::uniform(v.number("a"), v.number("b"));
  if (family == "gaussian") return Distribution::gaussian(v.number("mu"), v.number("sigma"));
  if (family == "truncated_gaussian") {
    return Distribution::truncated_gaussian(v.number("mu"), v.number("sigma"), v.number("lo"), v.number("hi"));
  }
  throw CapabilityError("config key '" + v.path() + ".family': unsupported distribution '" + family + "'");
}

Drift parse_drift(const ConfigView& v, int dimension) {
  const std::string name = v.str("name");
  if (name == "scalar_gain") {
    if (dimension != 1) throw InputError("config key '" + v.path() + "': scalar_gain needs dimension 1");
    return scalar_gain_drift(v.number("gain"));
  }
  if (name == "linear") {
    MatrixXd a = parse_matrix(v, "matrix");
    if (a.rows() != dimension) {
      throw InputError("config key '" + v.path() + ".matrix' does not match the model dimension");
    }
    return linear_drift(a);
  }
  if (name == "identity") return identity_drift();
  if (name == "expanding_sqrt") {
    if (dimension != 1) throw InputError("config key '" + v.path() + "': expanding_sqrt needs dimension 1");
    return expanding_sqrt_drift();
  }
  throw CapabilityError("config key '" + v.path() + ".name': unsupported drift '" + name + "'");
}

}  // namespace

namespace {

MatrixXd matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw InputError("config key '" + path + "' must be a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw InputError("config key '" + path + "' rows must be nonempty arrays");
  MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != cols) {
      throw InputError("config key '" + path + "' row " + std::to_string(i) + " has inconsistent length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw InputError("config key '" + path + "' must contain numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

MatrixXd parse_matrix(const ConfigView& parent, const std::string& key) {
  const ConfigView v = parent.at(key);
  return matrix_from_json(v.raw(), v.path());
}

Box parse_box(const ConfigView& parent, const std::string& key, int dimension) {
  const ConfigView v = parent.at(key);
  if (!v.raw().is_array()) throw InputError("config key '" + v.path() + "' must be an interval or a list of them");
  Box box;
  box.lo.resize(dimension);
  box.hi.resize(dimension);
  if (dimension == 1 && v.raw().size() == 2 && v.raw()[0].is_number()) {
    box.lo[0] = v.raw()[0].get<double>();
    box.hi[0] = v.raw()[1].get<double>();
    return box;
  }
  if (static_cast<int>(v.raw().size()) != dimension) {
    throw InputError("config key '" + v.path() + "' needs one [lo,hi] pair per dimension");
  }
  for (int d = 0; d < dimension; ++d) {
    const auto& pair = v.raw()[static_cast<std::size_t>(d)];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw InputError("config key '" + v.path() + "' entries must be [lo,hi] pairs");
    }
    box.lo[d] = pair[0].get<double>();
    box.hi[d] = pair[1].get<double>();
  }
  return box;
}

SystemModel parse_model(const ConfigView& config) {
  const ConfigView v = config.at("model");
  SystemModel model;
  model.dimension = static_cast<int>(v.integer_or("dimension", 1));
  if (model.dimension < 1) throw InputError("config key '" + v.path() + ".dimension' must be >= 1");
  const std::string kind = v.str_or("kind", "additive");
  if (kind == "additive") {
    model.kind = MapKind::additive;
    model.drift = parse_drift(v.at("drift"), model.dimension);
  } else if (kind == "semilinear") {
    model.kind = MapKind::semilinear;
    SemilinearModel sl;
    const ConfigView mats = v.at("matrices");
    if (!mats.raw().is_array() || mats.raw().empty()) {
      throw InputError("config key '" + mats.path() + "' must be a nonempty array of matrices");
    }
    for (std::size_t i = 0; i < mats.raw().size(); ++i) {
      sl.matrices.push_back(matrix_from_json(mats.raw()[i], mats.path() + "[" + std::to_string(i) + "]"));
      if (sl.matrices.back().rows() != model.dimension || sl.matrices.back().cols() != model.dimension) {
        throw InputError("config key '" + mats.path() + "[" + std::to_string(i) + "]' must be " +
                         std::to_string(model.dimension) + "x" + std::to_string(model.dimension));
      }
      if (std::abs(sl.matrices.back().determinant()) < 1e-300) {
        throw InputError("config key '" + mats.path() + "[" + std::to_string(i) + "]' is singular");
      }
    }
    if (v.has("labels")) {
      const ConfigView labels = v.at("labels");
      for (const auto& l : labels.raw()) sl.labels.push_back(l.get<std::string>());
    } else {
      for (std::size_t i = 0; i < sl.matrices.size(); ++i) sl.labels.push_back("u" + std::to_string(i + 1));
    }
    if (sl.labels.size() != sl.matrices.size()) {
      throw InputError("config key '" + v.path() + ".labels' must match the number of matrices");
    }
    if (v.has("input")) {
      sl.input = parse_matrix(v, "input");
      sl.control_dim = static_cast<int>(sl.input.cols());
    } else {
      sl.input = MatrixXd::Zero(model.dimension, 1);
      sl.control_dim = 1;
    }
    model.semilinear = std::move(sl);
  } else {
    throw CapabilityError("config key '" + v.path() + ".kind': unsupported kind '" + kind +
                          "' (additive | semilinear)");
  }
  model.noise = v.has("noise") ? parse_distribution(v.at("noise")) : Distribution::zero();
  model.init = v.has("init") ? parse_distribution(v.at("init")) : Distribution::point_mass(0.0);
  model.volume_expanding = v.boolean_or("volume_expanding", false);
  if (v.has("init_bounds")) {
    const ConfigView b = v.at("init_bounds");
    InitBounds bounds;
    bounds.p_min = b.number("p_min");
    bounds.p_max = b.number("p_max");
    const auto support = b.number_list("support");
    if (support.size() != 2) throw InputError("config key '" + b.path() + ".support' must be [lo,hi]");
    bounds.support_lo = support[0];
    bounds.support_hi = support[1];
    if (!(bounds.p_min > 0.0) || bounds.p_max < bounds.p_min) {
      throw InputError("config key '" + b.path() + "': requires 0 < p_min <= p_max");
    }
    model.init_bounds = bounds;
  }
  return model;
}

ChannelModel parse_channel(const ConfigView& config) {
  const ConfigView v = config.at("channel");
  const std::string kind = v.str_or("kind", "noiseless");
  if (kind == "noiseless") return ChannelModel::noiseless(static_cast<int>(v.integer("alphabet")));
  if (kind == "dmc") {
    if (v.has("bsc")) return ChannelModel::bsc(v.number("bsc"));
    if (v.has("matrix_csv")) return ChannelModel::dmc(read_matrix_csv(v.str("matrix_csv")));
    return ChannelModel::dmc(parse_matrix(v, "matrix"));
  }
  throw CapabilityError("config key '" + v.path() + ".kind': unsupported kind '" + kind + "' (noiseless | dmc)");
}

ZoomPolicyConfig parse_policy(const ConfigView& config) {
  const ConfigView v = config.at("policy");
  ZoomPolicyConfig p;
  p.rate_bits = static_cast<int>(v.integer("rate_bits"));
  p.gain = v.number("gain");
  p.range0 = v.number_or("range", 1.0);
  p.center0 = v.number_or("center", 0.0);
  p.zoom_out = v.number_or("zoom_out", 2.0);
  p.zoom_in = v.number_or("zoom_in", 1.0);
  p.safety = v.number_or("safety", 1.2);
  return p;
}

namespace {

json distribution_to_json(const Distribution& d) {
  switch (d.family) {
    case Distribution::Family::zero:
      return json{{"family", "zero"}};
    case Distribution::Family::point_mass:
      return json{{"family", "point_mass"}, {"value", d.value}};
    case Distribution::Family::uniform:
      return json{{"family", "uniform"}, {"a", d.a}, {"b", d.b}};
    case Distribution::Family::gaussian:
      return json{{"family", "gaussian"}, {"mu", d.mu}, {"sigma", d.sigma}};
    case Distribution::Family::truncated_gaussian:
      return json{{"family", "truncated_gaussian"}, {"mu", d.mu}, {"sigma", d.sigma}, {"lo", d.lo}, {"hi", d.hi}};
  }
  return json{};
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json model_to_json(const SystemModel& model) {
  json j;
  j["dimension"] = model.dimension;
  j["volume_expanding"] = model.volume_expanding;
  j["noise"] = distribution_to_json(model.noise);
  j["init"] = distribution_to_json(model.init);
  if (model.kind == MapKind::additive) {
    j["kind"] = "additive";
    j["drift"] = json{{"name", model.drift.name}};
  } else if (model.kind == MapKind::semilinear) {
    j["kind"] = "semilinear";
    json mats = json::array();
    for (const MatrixXd& m : model.semilinear->matrices) mats.push_back(matrix_to_json(m));
    j["matrices"] = mats;
    j["labels"] = model.semilinear->labels;
    j["input"] = matrix_to_json(model.semilinear->input);
  } else {
    j["kind"] = "general";
  }
  if (model.init_bounds) {
    j["init_bounds"] = json{{"p_min", model.init_bounds->p_min},
                            {"p_max", model.init_bounds->p_max},
                            {"support", {model.init_bounds->support_lo, model.init_bounds->support_hi}}};
  }
  return j;
}

json channel_to_json(const ChannelModel& channel) {
  json j;
  if (channel.kind == ChannelModel::Kind::noiseless) {
    j["kind"] = "noiseless";
    j["alphabet"] = channel.input_size;
  } else {
    j["kind"] = "dmc";
    j["matrix"] = matrix_to_json(channel.transition);
  }
  return j;
}

json policy_to_json(const ZoomPolicyConfig& policy) {
  return json{{"rate_bits", policy.rate_bits}, {"gain", policy.gain},     {"range", policy.range0},
              {"center", policy.center0},     {"zoom_out", policy.zoom_out}, {"zoom_in", policy.zoom_in},
              {"safety", policy.safety}};
}

MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open transition CSV '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("transition CSV '" + path + "': cannot parse '" + cell + "' as a number");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("transition CSV '" + path + "' is empty");
  const std::size_t cols = rows.front().size();
  MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw InputError("transition CSV '" + path + "': row " + std::to_string(i) + " has inconsistent length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

}  // namespace stabcap
