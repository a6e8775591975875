#include "invforge/serialize.hpp"

#include <fstream>

#include <json.hpp>

namespace invforge {

using njson = nlohmann::ordered_json;

namespace {

const char* kind_tag(FactorKind k) { return kind_name(k); }

FactorKind kind_from_tag(const std::string& s) {
  for (FactorKind k : {FactorKind::Riemann, FactorKind::Ricci, FactorKind::ScalarR,
                       FactorKind::Weyl, FactorKind::Schouten, FactorKind::TracedSchouten,
                       FactorKind::Cotton, FactorKind::Metric, FactorKind::FunctionJet,
                       FactorKind::SymField})
    if (s == kind_name(k)) return k;
  throw ParseError("unknown factor kind tag: " + s);
}

njson term_json(const Term& t) {
  njson j;
  j["mode"] = t.mode == Mode::Exact ? "exact" : "graded";
  njson fs = njson::array();
  for (const Factor& f : t.factors) {
    njson fj;
    fj["kind"] = kind_tag(f.kind);
    fj["deriv"] = f.deriv;
    if (!f.label.empty()) fj["label"] = f.label;
    fs.push_back(fj);
  }
  j["factors"] = fs;
  njson es = njson::array();
  for (const Edge& e : t.edges) es.push_back({e.a.factor, e.a.slot, e.b.factor, e.b.slot});
  j["edges"] = es;
  njson fr = njson::array();
  for (const SlotRef& s : t.free) fr.push_back({s.factor, s.slot});
  j["free"] = fr;
  return j;
}

Term term_from(const njson& j) {
  Term t;
  t.mode = j.at("mode").get<std::string>() == "exact" ? Mode::Exact : Mode::Graded;
  for (const auto& fj : j.at("factors")) {
    Factor f;
    f.kind = kind_from_tag(fj.at("kind").get<std::string>());
    f.deriv = fj.at("deriv").get<int>();
    if (fj.contains("label")) f.label = fj.at("label").get<std::string>();
    t.factors.push_back(f);
  }
  for (const auto& ej : j.at("edges"))
    t.edges.push_back({{ej.at(0).get<int>(), ej.at(1).get<int>()},
                       {ej.at(2).get<int>(), ej.at(3).get<int>()}});
  for (const auto& fj : j.at("free"))
    t.free.push_back({fj.at(0).get<int>(), fj.at(1).get<int>()});
  t.validate();
  return t;
}

njson combination_json(const LinearCombination& lc) {
  njson j;
  j["schema"] = "invforge/1";
  if (lc.has_homogeneity()) {
    j["weight"] = lc.weight();
    j["arity"] = lc.arity();
  }
  njson terms = njson::array();
  for (const auto& [k, e] : lc.terms()) {
    njson tj;
    tj["coeff"] = e.coeff.to_string();
    tj["term"] = term_json(e.term);
    terms.push_back(tj);
  }
  j["terms"] = terms;
  return j;
}

}  // namespace

std::string to_json(const Term& t, int indent) { return term_json(t).dump(indent); }

std::string to_json(const LinearCombination& lc, int indent) {
  return combination_json(lc).dump(indent);
}

std::string to_json(const SolveResult& r, int indent) {
  njson j;
  j["schema"] = "invforge/1";
  j["success"] = r.success;
  j["threshold"] = r.threshold;
  njson cs = njson::array();
  for (const auto& [term, coeff] : r.coefficients) {
    njson cj;
    cj["coeff"] = coeff.to_string();
    cj["candidate"] = term_json(term);
    cs.push_back(cj);
  }
  j["coefficients"] = cs;
  j["residual"] = combination_json(r.residual);
  return j.dump(indent);
}

Term term_from_json(const std::string& text) { return term_from(njson::parse(text)); }

LinearCombination combination_from_json(const std::string& text) {
  njson j = njson::parse(text);
  LinearCombination out;
  for (const auto& tj : j.at("terms"))
    out.add(term_from(tj.at("term")),
            DimensionCoefficient::parse(tj.at("coeff").get<std::string>()));
  return out;
}

std::vector<JetDescriptor> load_jet_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open jet corpus: " + path);
  njson j;
  in >> j;
  std::vector<JetDescriptor> out;
  for (const auto& je : j.at("jets")) {
    JetDescriptor d;
    d.seed = je.at("seed").get<uint64_t>();
    d.dimension = je.at("dimension").get<int>();
    d.order = je.at("order").get<int>();
    for (const auto& f : je.at("functions")) d.functions.push_back(f.get<std::string>());
    if (je.contains("sym_fields"))
      for (const auto& f : je.at("sym_fields")) d.sym_fields.push_back(f.get<std::string>());
    out.push_back(std::move(d));
  }
  return out;
}

void write_jet_corpus(const std::string& path, const std::vector<JetDescriptor>& jets) {
  njson j;
  j["schema"] = "invforge/1";
  njson arr = njson::array();
  for (const auto& d : jets) {
    njson je;
    je["seed"] = d.seed;
    je["dimension"] = d.dimension;
    je["order"] = d.order;
    je["functions"] = d.functions;
    je["sym_fields"] = d.sym_fields;
    arr.push_back(je);
  }
  j["jets"] = arr;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

std::vector<JetDescriptor> default_jet_corpus() {
  std::vector<JetDescriptor> out;
  // 20 seeded jets cycling the test dimensions 4..7 (n = 3 is excluded: the
  // (n-3) denominators are singular there)
  for (int k = 0; k < 20; ++k) {
    JetDescriptor d;
    d.seed = 1000 + 37 * (uint64_t)k;
    d.dimension = 4 + (k % 4);
    d.order = 4;
    d.functions = {"psi", "phi", "psi1", "psi2", "Omega1"};
    d.sym_fields = {"v"};
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace invforge
