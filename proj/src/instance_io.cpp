#include "iptr/instance_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iptr/errors.hpp"

namespace iptr {

namespace {

std::string format_real(double v) {
  if (!std::isfinite(v)) throw DomainError("cannot serialize a non-finite real");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep reals recognizable as reals on reload.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void dump_rec(const Json& j, int indent, int depth, std::ostringstream& out) {
  const std::string pad(static_cast<size_t>(indent * (depth + 1)), ' ');
  const std::string pad_close(static_cast<size_t>(indent * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out << ",\n";
      first = false;
      out << pad << Json(it.key()).dump() << ": ";
      dump_rec(it.value(), indent, depth + 1, out);
    }
    out << "\n" << pad_close << "}";
  } else if (j.is_array()) {
    bool flat = true;
    for (const auto& e : j) flat = flat && is_scalar(e);
    if (flat) {
      out << "[";
      for (size_t k = 0; k < j.size(); ++k) {
        if (k) out << ", ";
        dump_rec(j[k], indent, depth + 1, out);
      }
      out << "]";
      return;
    }
    out << "[\n";
    for (size_t k = 0; k < j.size(); ++k) {
      if (k) out << ",\n";
      out << pad;
      dump_rec(j[k], indent, depth + 1, out);
    }
    out << "\n" << pad_close << "]";
  } else if (j.is_number_float()) {
    out << format_real(j.get<double>());
  } else {
    out << j.dump();
  }
}

Json constants_to_json(const RegularityConstants& k) {
  return Json{{"l", k.l}, {"rho", k.rho}, {"l_phi", k.l_phi}, {"gamma", k.gamma}};
}

RegularityConstants constants_from_json(const Json& j) {
  RegularityConstants k;
  k.l = j.at("l").get<double>();
  k.rho = j.at("rho").get<double>();
  k.l_phi = j.at("l_phi").get<double>();
  k.gamma = j.value("gamma", 1.0);
  return k;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream out;
  dump_rec(j, indent, 0, out);
  out << "\n";
  return out.str();
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw DomainError("expected a JSON array of reals");
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Index i = 0; i < M.rows(); ++i) rows.push_back(vector_to_json(M.row(i).transpose()));
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("expected a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& r = j[static_cast<size_t>(i)];
    if (static_cast<Index>(r.size()) != cols) throw DomainError("ragged matrix rows");
    for (Index k = 0; k < cols; ++k) M(i, k) = r[static_cast<size_t>(k)].get<double>();
  }
  return M;
}

Json instance_to_json(const ProblemInstance& p) {
  Json j;
  j["name"] = p.name;
  j["n"] = p.n();
  j["m"] = p.m();
  Json obj;
  obj["kind"] = to_string(p.objective.kind);
  if (p.generator) {
    j["generator"] = Json{{"kind", p.generator->kind},
                          {"seed", p.generator->seed},
                          {"sigma", p.generator->sigma}};
  } else {
    j["A"] = matrix_to_json(p.A);
    if (p.objective.kind == ObjectiveKind::kQuartic ||
        p.objective.kind == ObjectiveKind::kConcaveQuadratic) {
      obj["sigma"] = p.objective.sigma;
      obj["Q"] = matrix_to_json(p.objective.Q);
      obj["c"] = vector_to_json(p.objective.c);
    }
  }
  j["b"] = vector_to_json(p.b);
  j["objective"] = obj;
  j["constants"] = constants_to_json(p.constants);
  j["x0"] = vector_to_json(p.x0);
  if (p.f_lower_bound) j["f_lower_bound"] = *p.f_lower_bound;
  return j;
}

ProblemInstance instance_from_json(const Json& j) {
  ProblemInstance p;
  const Index n = j.at("n").get<Index>();
  const Index m = j.at("m").get<Index>();
  const ObjectiveKind kind = objective_kind_from_string(j.at("objective").at("kind"));
  if (j.contains("generator")) {
    const Json& g = j["generator"];
    GeneratorSpec spec{g.at("kind").get<std::string>(), n, m, g.value("sigma", 0.0),
                       g.at("seed").get<uint64_t>()};
    p = materialize(spec);
  } else if (kind == ObjectiveKind::kFig1 || kind == ObjectiveKind::kFig2) {
    p = kind == ObjectiveKind::kFig1 ? builtin_fig1() : builtin_fig2();
    p.A = matrix_from_json(j.at("A"));
  } else {
    p.A = matrix_from_json(j.at("A"));
    p.objective.kind = kind;
    const Json& obj = j.at("objective");
    p.objective.sigma = obj.value("sigma", 0.0);
    p.objective.Q = matrix_from_json(obj.at("Q"));
    p.objective.c = vector_from_json(obj.at("c"));
  }
  if (j.contains("name")) p.name = j["name"].get<std::string>();
  if (p.A.rows() != m || p.A.cols() != n) throw DomainError("instance n/m disagree with A");
  p.b = vector_from_json(j.at("b"));
  p.x0 = vector_from_json(j.at("x0"));
  p.constants = constants_from_json(j.at("constants"));
  if (j.contains("f_lower_bound")) p.f_lower_bound = j["f_lower_bound"].get<double>();
  p.validate();
  return p;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DomainError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void save_instance(const ProblemInstance& p, const std::string& path) {
  write_text_file(path, dump_json(instance_to_json(p)));
}

ProblemInstance load_instance(const std::string& path_or_builtin) {
  if (path_or_builtin == "fig1") return builtin_fig1();
  if (path_or_builtin == "fig2") return builtin_fig2();
  try {
    return instance_from_json(read_json_file(path_or_builtin));
  } catch (const Json::exception& e) {
    throw DomainError("invalid instance file '" + path_or_builtin + "': " + e.what());
  }
}

}  // namespace iptr
