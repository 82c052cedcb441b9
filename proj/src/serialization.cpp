#include "perhom/serialization.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace perhom {

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("unexpected end of stream");
  return v;
}

// Lattice indices in row-major order of k from -N/2 to N/2-1.
std::vector<Index> ordered_indices(const SpectralGrid& g) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(g.size()));
  const int n = g.modes();
  for (Index flat = 0; flat < g.size(); ++flat) {
    WaveVector k{0, 0, 0};
    Index rest = flat;
    for (int a = g.dim() - 1; a >= 0; --a) {
      k[static_cast<std::size_t>(a)] = static_cast<int>(rest % n) - n / 2;
      rest /= n;
    }
    out.push_back(g.index_of(k));
  }
  return out;
}

}  // namespace

void write_field(std::ostream& os, const PeriodicField& u) {
  const auto& g = u.grid();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.modes()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(u.components()));
  const auto order = ordered_indices(g);
  for (int c = 0; c < u.components(); ++c)
    for (Index i : order) {
      put<double>(os, u.coeffs()(i, c).real());
      put<double>(os, u.coeffs()(i, c).imag());
    }
}

PeriodicField read_field(std::istream& is, bool real) {
  const auto d = static_cast<int>(get<std::uint32_t>(is));
  const auto n = static_cast<int>(get<std::uint32_t>(is));
  const auto comps = static_cast<int>(get<std::uint32_t>(is));
  PeriodicField u(make_grid(d, n), comps, real);
  const auto order = ordered_indices(u.grid());
  for (int c = 0; c < comps; ++c)
    for (Index i : order) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      u.coeffs()(i, c) = Complex(re, im);
    }
  return u;
}

void save_field(const std::string& path, const PeriodicField& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_field(os, u);
}

PeriodicField load_field(const std::string& path, bool real) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field(is, real);
}

nlohmann::json field_to_json(const PeriodicField& u) {
  nlohmann::json j;
  j["d"] = u.grid().dim();
  j["N"] = u.grid().modes();
  j["components"] = u.components();
  std::vector<double> data;
  const auto order = ordered_indices(u.grid());
  for (int c = 0; c < u.components(); ++c)
    for (Index i : order) {
      data.push_back(u.coeffs()(i, c).real());
      data.push_back(u.coeffs()(i, c).imag());
    }
  j["coeffs"] = data;
  return j;
}

PeriodicField field_from_json(const nlohmann::json& j, bool real) {
  PeriodicField u(make_grid(j.at("d").get<int>(), j.at("N").get<int>()), j.at("components").get<int>(), real);
  const auto data = j.at("coeffs").get<std::vector<double>>();
  const auto order = ordered_indices(u.grid());
  if (data.size() != 2 * order.size() * static_cast<std::size_t>(u.components()))
    throw std::invalid_argument("field_from_json: coefficient count mismatch");
  std::size_t at = 0;
  for (int c = 0; c < u.components(); ++c)
    for (Index i : order) {
      u.coeffs()(i, c) = Complex(data[at], data[at + 1]);
      at += 2;
    }
  return u;
}

nlohmann::json measure_to_json(const SphericalMeasure& m) {
  nlohmann::json j;
  j["alpha"] = m.alpha();
  if (m.is_uniform()) {
    j["uniform"] = m.total_mass();
    return j;
  }
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms()) {
    std::vector<double> dir(a.direction.data(), a.direction.data() + a.direction.size());
    atoms.push_back({dir, a.weight});
  }
  j["atoms"] = atoms;
  return j;
}

SphericalMeasure measure_from_json(const nlohmann::json& j, int dim) {
  const double alpha = j.at("alpha").get<double>();
  if (j.contains("atoms")) {
    std::vector<SphericalAtom> atoms;
    for (const auto& a : j.at("atoms")) {
      const auto dir = a.at(0).get<std::vector<double>>();
      atoms.push_back({Eigen::Map<const Eigen::VectorXd>(dir.data(), static_cast<Index>(dir.size())),
                       a.at(1).get<double>()});
    }
    return SphericalMeasure::atomic(alpha, std::move(atoms));
  }
  if (j.contains("uniform")) return SphericalMeasure::uniform(alpha, dim, j.at("uniform").get<double>());
  return SphericalMeasure::fractional_laplacian(alpha, dim);
}

nlohmann::json drift_spec_to_json(const DriftSpec& s) {
  nlohmann::json j;
  switch (s.kind) {
    case DriftSpec::Kind::fourier_list: j["kind"] = "fourier_list"; break;
    case DriftSpec::Kind::gradient_of: j["kind"] = "gradient_of"; break;
    case DriftSpec::Kind::white_noise: j["kind"] = "white_noise"; break;
  }
  if (s.kind == DriftSpec::Kind::white_noise) {
    j["seed"] = s.seed;
    j["regularity_target"] = s.regularity_target;
    j["amplitude"] = s.amplitude;
    j["centered"] = s.centered;
    return j;
  }
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : s.terms) {
    std::vector<int> k(t.k.begin(), t.k.begin() + s.dim);
    terms.push_back({{"k", k}, {"component", t.component}, {"cos", t.cos_coeff}, {"sin", t.sin_coeff}});
  }
  j["terms"] = terms;
  return j;
}

DriftSpec drift_spec_from_json(const nlohmann::json& j, int dim) {
  DriftSpec s;
  s.dim = dim;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fourier_list") {
    s.kind = DriftSpec::Kind::fourier_list;
  } else if (kind == "gradient_of") {
    s.kind = DriftSpec::Kind::gradient_of;
  } else if (kind == "white_noise") {
    s.kind = DriftSpec::Kind::white_noise;
    s.seed = j.value("seed", std::uint64_t{0});
    s.regularity_target = j.value("regularity_target", -0.55);
    s.amplitude = j.value("amplitude", 1.0);
    s.centered = j.value("centered", true);
    return s;
  } else {
    throw std::invalid_argument("unknown drift kind '" + kind + "'");
  }
  for (const auto& t : j.value("terms", nlohmann::json::array())) {
    FourierTerm term;
    const auto k = t.at("k").get<std::vector<int>>();
    if (static_cast<int>(k.size()) != dim) throw std::invalid_argument("drift term wavevector has the wrong length");
    for (int a = 0; a < dim; ++a) term.k[static_cast<std::size_t>(a)] = k[static_cast<std::size_t>(a)];
    term.component = t.value("component", 0);
    term.cos_coeff = t.value("cos", 0.0);
    term.sin_coeff = t.value("sin", 0.0);
    s.terms.push_back(term);
  }
  return s;
}

void write_ensemble(std::ostream& os, const TrajectoryEnsemble& ens) {
  put<std::uint32_t>(os, kEnsembleMagic);
  put<std::uint16_t>(os, kEnsembleVersion);
  put<std::uint16_t>(os, static_cast<std::uint16_t>(ens.dim));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ens.paths));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ens.checkpoints));
  put<double>(os, ens.dt);
  put<std::uint64_t>(os, ens.seed);
  put<std::uint64_t>(os, ens.observable.empty() ? 0 : 1);
  for (double t : ens.times) put<double>(os, t);
  for (int a = 0; a < ens.dim; ++a) put<double>(os, ens.x0[a]);
  for (double v : ens.drift_integral) put<double>(os, v);
  for (double v : ens.levy) put<double>(os, v);
  for (double v : ens.observable) put<double>(os, v);
}

TrajectoryEnsemble read_ensemble(std::istream& is) {
  if (get<std::uint32_t>(is) != kEnsembleMagic) throw std::runtime_error("read_ensemble: bad magic");
  if (get<std::uint16_t>(is) != kEnsembleVersion) throw std::runtime_error("read_ensemble: unsupported version");
  TrajectoryEnsemble ens;
  ens.dim = get<std::uint16_t>(is);
  ens.paths = get<std::uint32_t>(is);
  ens.checkpoints = static_cast<int>(get<std::uint32_t>(is));
  ens.dt = get<double>(is);
  ens.seed = get<std::uint64_t>(is);
  const bool has_obs = get<std::uint64_t>(is) != 0;
  for (int c = 0; c < ens.checkpoints; ++c) ens.times.push_back(get<double>(is));
  ens.x0.resize(ens.dim);
  for (int a = 0; a < ens.dim; ++a) ens.x0[a] = get<double>(is);
  const std::size_t slots = static_cast<std::size_t>(ens.paths) * static_cast<std::size_t>(ens.checkpoints);
  ens.drift_integral.resize(slots * static_cast<std::size_t>(ens.dim));
  ens.levy.resize(slots * static_cast<std::size_t>(ens.dim));
  for (auto& v : ens.drift_integral) v = get<double>(is);
  for (auto& v : ens.levy) v = get<double>(is);
  if (has_obs) {
    ens.observable.resize(slots);
    for (auto& v : ens.observable) v = get<double>(is);
  }
  return ens;
}

std::string content_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("content_hash: SHA-1 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

}  // namespace perhom
