#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qdx/construct.hpp"
#include "qdx/curve.hpp"
#include "qdx/errors.hpp"
#include "qdx/inscribe.hpp"
#include "qdx/lens.hpp"
#include "qdx/quad.hpp"
#include "qdx/suffridge.hpp"

using namespace qdx;
using nlohmann::json;

namespace {

constexpr const char* kOutDirEnv = "QDX_OUT_DIR";

// Options shared by every subcommand.
struct Outputs {
  std::string json, svg, csv;
  std::uint64_t seed = 1;
};

std::filesystem::path resolve(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) return std::filesystem::path(dir) / p;
  return p;
}

void writeFile(const std::string& path, const std::string& text) {
  auto p = resolve(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  f << text;
}

// Inline JSON if it starts like JSON, otherwise the contents of a file.
std::string descriptor(const std::string& s) {
  auto first = s.find_first_not_of(" \t\n");
  if (first != std::string::npos && (s[first] == '[' || s[first] == '{')) return s;
  std::ifstream f(s, std::ios::binary);
  if (!f) throw InputError("cannot read input file " + s);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json parseJson(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + what + ": " + e.what());
  }
}

// Wraps a result with the schema tag and the manifest, then emits it.
void emit(const json& manifest, const std::string& key, json result, const Outputs& out) {
  json j;
  j["schema"] = 1;
  j["manifest"] = manifest;
  j[key] = std::move(result);
  std::string text = j.dump(2) + "\n";
  if (out.json.empty())
    std::cout << text;
  else
    writeFile(out.json, text);
}

std::string manifestLine(const json& m) { return m.dump(); }

Family parseFamily(const std::string& s) {
  if (s == "S" || s == "s") return Family::S;
  if (s == "Sigma" || s == "sigma") return Family::Sigma;
  throw InputError("unknown family " + s + " (expected S or Sigma)");
}

// --- lens -------------------------------------------------------------

struct LensArgs {
  std::string rational, lens;
  LensSolveOptions opt;
};

void addLensInput(CLI::App* c, LensArgs& a) {
  c->add_option("--rational", a.rational, "numerator/denominator as JSON coefficient arrays, or a file");
  c->add_option("--lens", a.lens, "lens configuration JSON {gamma, source, masses, positions}, or a file");
  c->add_option("--candidate-tol", a.opt.candidateTol, "pre-filter on the scaled residual")->capture_default_str();
  c->add_option("--residual-tol", a.opt.residualTol, "acceptance residual after polishing")->capture_default_str();
  c->add_option("--super-tol", a.opt.superTol, "multiplier bound for superattracting points")->capture_default_str();
  c->add_option("--hyper-margin", a.opt.hyperMargin, "band around multiplier 1 counted as nonhyperbolic")
      ->capture_default_str();
}

RationalMap lensInput(const LensArgs& a, json& input) {
  if (a.rational.empty() == a.lens.empty()) throw InputError("give exactly one of --rational or --lens");
  if (!a.rational.empty()) {
    std::string text = descriptor(a.rational);
    input = {{"rational", text}};
    return parseRational(text);
  }
  json cfg = parseJson(descriptor(a.lens), "--lens");
  input = {{"lens", cfg}};
  return lensFromMasses(lensConfigFromJson(cfg));
}

json lensTolerances(const LensSolveOptions& o) {
  return {{"candidateTol", o.candidateTol},
          {"residualTol", o.residualTol},
          {"superTol", o.superTol},
          {"hyperMargin", o.hyperMargin}};
}

void lensSolve(const LensArgs& a, const Outputs& out) {
  json input;
  RationalMap r = lensInput(a, input);
  json manifest{{"subcommand", "lens solve"}, {"input", input}, {"tolerances", lensTolerances(a.opt)}, {"seed", out.seed}};
  auto rep = solveLens(r, a.opt);
  json j = toJson(rep);
  j["bound"] = sharpBound(rep.d, rep.n);
  if (!checkSharpBound(rep)) throw InvariantViolation("fixed point count exceeds the sharp bound");
  emit(manifest, "report", j, out);
}

void lensBound(const LensArgs& a, const Outputs& out) {
  json input;
  RationalMap r = lensInput(a, input);
  json manifest{{"subcommand", "lens bound"}, {"input", input}, {"tolerances", lensTolerances(a.opt)}, {"seed", out.seed}};
  auto rep = solveLens(r, a.opt);
  const int bound = sharpBound(rep.d, rep.n);
  json j{{"d", rep.d}, {"n", rep.n}, {"Fhat", rep.Fhat}, {"Ahat", rep.Ahat}, {"bound", bound},
         {"bound3d2n3", 3 * rep.d + 2 * rep.n - 3}, {"bound5d5", 5 * rep.d - 5}, {"hyperbolic", rep.hyperbolic},
         {"withinBound", rep.Fhat <= bound}, {"tight", rep.Fhat == bound}};
  if (rep.Fhat > bound) {
    emit(manifest, "bound", j, out);
    throw InvariantViolation("F = " + std::to_string(rep.Fhat) + " exceeds the bound " + std::to_string(bound));
  }
  emit(manifest, "bound", j, out);
}

struct SearchArgs {
  int N = 2;
  double gamma = 0.5;
  long budget = 10000;
};

void lensSearch(const SearchArgs& a, const Outputs& out) {
  if (a.N < 1) throw InputError("--masses must be at least 1");
  if (a.budget < 1) throw InputError("--budget must be positive");
  json manifest{{"subcommand", "lens search"},
                {"input", {{"masses", a.N}, {"gamma", a.gamma}, {"budget", a.budget}}},
                {"seed", out.seed}};
  auto res = searchMaxImages(a.N, twoDiskEllipseSeed(a.N, a.gamma), a.budget, out.seed);
  json j{{"config", toJson(res.config)}, {"images", res.images}, {"target", res.target},
         {"shortfall", res.shortfall}, {"evaluations", res.evaluations}, {"gamma0", ellipseFeasibilityGamma()}};
  emit(manifest, "search", j, out);
}

// --- curve ------------------------------------------------------------

struct CurveArgs {
  std::string family = "S";
  int known = 0;
  std::string map;
  CurveOptions opt;
  int csvSamples = 1024;
};

void addCurveInput(CLI::App* c, CurveArgs& a) {
  c->add_option("--family", a.family, "S or Sigma")->capture_default_str();
  c->add_option("--known", a.known, "catalog extreme map of this degree (2..5)");
  c->add_option("--map", a.map, "boundary map JSON {family, lowPower, coeffs}, or a file");
  c->add_option("--grid", a.opt.gridSize, "torus grid for double points")->capture_default_str();
  c->add_option("--cusp-snap", a.opt.cuspSnap, "unit circle snap for cusp roots")->capture_default_str();
  c->add_option("--newton-tol", a.opt.newtonTol, "Newton tolerance")->capture_default_str();
  c->add_option("--collinear-tol", a.opt.collinearTol, "tangent angle counted as tangential (radians)")
      ->capture_default_str();
  c->add_option("--curvature-samples", a.opt.curvatureSamples, "regular curvature samples")->capture_default_str();
}

BoundaryMap curveInput(const CurveArgs& a, json& input) {
  if ((a.known > 0) == !a.map.empty()) throw InputError("give exactly one of --known or --map");
  if (a.known > 0) {
    input = {{"family", a.family}, {"known", a.known}};
    return knownSuffridge(parseFamily(a.family), a.known);
  }
  json m = parseJson(descriptor(a.map), "--map");
  input = {{"map", m}};
  return boundaryMapFromJson(m);
}

json curveTolerances(const CurveOptions& o) {
  return {{"gridSize", o.gridSize},
          {"cuspSnap", o.cuspSnap},
          {"newtonTol", o.newtonTol},
          {"collinearTol", o.collinearTol},
          {"curvatureSamples", o.curvatureSamples}};
}

void curveRun(const CurveArgs& a, Outputs out, bool plot) {
  json input;
  BoundaryMap f = curveInput(a, input);
  json manifest{{"subcommand", plot ? "curve plot" : "curve analyze"},
                {"input", input},
                {"tolerances", curveTolerances(a.opt)},
                {"seed", out.seed}};
  auto curve = analyzeCurve(f, a.opt);
  auto cen = census(f, a.opt);
  if (plot && out.svg.empty()) out.svg = "curve.svg";
  if (!out.svg.empty()) writeFile(out.svg, curveSvg(f, curve, manifestLine(manifest)));
  if (!out.csv.empty()) writeFile(out.csv, curveCsv(f, curve, a.csvSamples));
  json j{{"map", toJson(f)}, {"census", toJson(cen)}, {"curve", toJson(curve)}};
  emit(manifest, plot ? "plot" : "analysis", j, out);
}

// --- quad -------------------------------------------------------------

struct QuadArgs {
  std::vector<std::string> known;
  std::string poly;
  int kmax = 5;
  double tol = 1e-10;
};

void quadVerify(const QuadArgs& a, const Outputs& out) {
  if (a.known.empty() == a.poly.empty()) throw InputError("give exactly one of --known or --poly");
  json input;
  ComplexPoly f;
  if (!a.known.empty()) {
    if (parseFamily(a.known[0]) != Family::S) throw InputError("the quadrature check needs a bounded map (family S)");
    int d = 0;
    try {
      d = std::stoi(a.known[1]);
    } catch (const std::exception&) {
      throw InputError("bad degree " + a.known[1]);
    }
    auto m = knownSuffridge(Family::S, d);
    f = m.laurent().clearedNumerator();
    input = {{"known", {"S", d}}};
  } else {
    json p = parseJson(descriptor(a.poly), "--poly");
    f = polyFromJson(p);
    input = {{"poly", p}};
  }
  if (a.kmax < 0) throw InputError("--kmax must be nonnegative");
  json manifest{{"subcommand", "quad verify"}, {"input", input}, {"tolerances", {{"residual", a.tol}}}, {"seed", out.seed}};
  auto res = verifyQuadratureIdentity(f, a.kmax);
  double worst = 0;
  for (const auto& r : res) worst = std::max(worst, r.residual);
  json j{{"quadrature", toJson(schwarzPrincipalPart(f))},
         {"residuals", toJson(res)},
         {"maxResidual", worst},
         {"area", areaTheorem(f)},
         {"pass", worst <= a.tol}};
  emit(manifest, "verify", j, out);
  if (worst > a.tol) throw NumericalError("moment residual " + std::to_string(worst) + " above tolerance");
}

// --- inscribe ---------------------------------------------------------

struct InscribeArgs {
  std::string host = "deltoid";
  std::string family = "S";
  int known = 3;
  int face = -1;
  InscribeOptions opt;
};

void addInscribeInput(CLI::App* c, InscribeArgs& a) {
  c->add_option("--host", a.host, "deltoid (the genuine deltoid) or face (a face of an extreme map)")
      ->capture_default_str();
  c->add_option("--family", a.family, "family of the extreme map for --host face")->capture_default_str();
  c->add_option("--known", a.known, "degree of the extreme map for --host face")->capture_default_str();
  c->add_option("--face", a.face, "face id for --host face; default the first deltoid-like face");
  c->add_option("--p-grid", a.opt.pGrid, "sweep grid on the concave arc")->capture_default_str();
  c->add_option("--contact-tol", a.opt.contactTol, "contact tolerance relative to the scale")->capture_default_str();
  c->add_option("--penetration-tol", a.opt.penetrationTol, "allowed outward excursion")->capture_default_str();
  c->add_option("--verify-samples", a.opt.verifySamples, "containment check samples")->capture_default_str();
}

PlaneCurve inscribeHost(const InscribeArgs& a, json& input) {
  if (a.host == "deltoid") {
    input = {{"host", "deltoid"}};
    return genuineDeltoid();
  }
  if (a.host != "face") throw InputError("unknown host " + a.host + " (expected deltoid or face)");
  BoundaryMap f = knownSuffridge(parseFamily(a.family), a.known);
  auto curve = analyzeCurve(f);
  auto faces = componentAnalysis(f, curve);
  const FaceInfo* pick = nullptr;
  for (const auto& fi : faces) {
    if (fi.isDomain || !fi.bounded) continue;
    if (a.face >= 0 ? fi.id == a.face : fi.classification == "deltoid-like") {
      pick = &fi;
      break;
    }
  }
  if (!pick) throw InputError("no matching bounded complement face");
  input = {{"host", "face"}, {"family", a.family}, {"known", a.known}, {"face", pick->id}};
  return faceCurve(f, curve, *pick);
}

void inscribeRun(const InscribeArgs& a, const Outputs& out, bool circle) {
  json input;
  PlaneCurve T = inscribeHost(a, input);
  json manifest{{"subcommand", circle ? "inscribe circle" : "inscribe cardioid"},
                {"input", input},
                {"tolerances",
                 {{"pGrid", a.opt.pGrid},
                  {"contactTol", a.opt.contactTol},
                  {"penetrationTol", a.opt.penetrationTol},
                  {"verifySamples", a.opt.verifySamples}}},
                {"seed", out.seed}};
  PlaneCurve C = circle ? unitCircle() : genuineCardioid();
  auto res = circle ? inscribeCircle(T, a.opt) : inscribeCardioid(T, C, a.opt);
  if (!out.svg.empty()) writeFile(out.svg, inscriptionSvg(T, C, res, manifestLine(manifest)));
  emit(manifest, "inscription", toJson(res), out);
}

// --- suffridge --------------------------------------------------------

struct SuffridgeArgs {
  std::string family = "S";
  int degree = 4;
  ExtremalizeOptions opt;
};

void suffridgeSearch(const SuffridgeArgs& a, const Outputs& out) {
  Family fam = parseFamily(a.family);
  json manifest{{"subcommand", "suffridge search"},
                {"input", {{"family", a.family}, {"degree", a.degree}}},
                {"tolerances",
                 {{"maxRounds", a.opt.maxRounds},
                  {"stepFraction", a.opt.stepFraction},
                  {"closureTol", a.opt.closureTol},
                  {"deltaResolution", a.opt.delta.relResolution}}},
                {"seed", out.seed}};
  auto res = extremalize(symmetricStart(fam, a.degree), a.opt);
  if (!out.svg.empty()) writeFile(out.svg, curveSvg(res.f, analyzeCurve(res.f), manifestLine(manifest)));
  emit(manifest, "search", toJson(res), out);
}

// --- construct --------------------------------------------------------

struct ConstructArgs {
  std::vector<int> partition;
  int infinity = 0;
  double gamma = 0.5;
  int oracle = 4096;
  double contactTol = 1e-6;
};

void constructRun(const ConstructArgs& a, const Outputs& out, bool bounded) {
  ConstructOptions opt;
  opt.gamma = a.gamma;
  opt.contactTol = a.contactTol;
  json input{{"partition", a.partition}};
  if (!bounded) {
    input["infinity"] = a.infinity;
    input["gamma"] = a.gamma;
  }
  json manifest{{"subcommand", bounded ? "construct bqd" : "construct uqd"},
                {"input", input},
                {"tolerances", {{"contactTol", a.contactTol}, {"oracleResolution", a.oracle}}},
                {"seed", out.seed}};
  if (a.oracle < 0) throw InputError("--oracle must be nonnegative");
  ConstructionPlan plan;
  if (bounded)
    plan = buildBoundedConfig(a.partition, opt);
  else if (a.infinity > 0)
    plan = buildUnboundedConfig(a.partition, a.infinity, opt);
  else
    plan = buildUnboundedConfig(a.partition, std::nullopt, opt);
  if (!out.svg.empty()) writeFile(out.svg, constructionSvg(plan, manifestLine(manifest)));
  auto rep = countComplementComponents(plan, a.oracle);
  emit(manifest, "construction", {{"plan", toJson(plan)}, {"report", toJson(rep)}}, out);
  if (a.oracle > 0 && !rep.oracle.agrees)
    throw InvariantViolation("raster oracle found " + std::to_string(rep.oracle.faceCount) + " faces, arrangement " +
                             std::to_string(rep.faceCount));
}

int fail(int code, const std::string& kind, const std::string& msg) {
  std::string line = msg;
  for (char& ch : line)
    if (ch == '\n') ch = ' ';
  std::cerr << "qdx: " << kind << ": " << line << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrature domains, extreme univalent maps and anti-holomorphic fixed points"};
  app.require_subcommand(1);
  Outputs out;
  auto addOutputs = [&out](CLI::App* c, bool csv) {
    c->add_option("--json", out.json, "JSON output path (default stdout)");
    c->add_option("--svg", out.svg, "SVG output path");
    if (csv) c->add_option("--csv", out.csv, "CSV output path (t,x,y,kappa)");
    c->add_option("--seed", out.seed, "seed recorded in the manifest and used by searches")->capture_default_str();
  };

  auto* lens = app.add_subcommand("lens", "fixed points of r(z) = conj z")->require_subcommand(1);
  LensArgs la;
  auto* lSolve = lens->add_subcommand("solve", "solve and classify fixed points");
  auto* lBound = lens->add_subcommand("bound", "compare the fixed point count with the sharp bound");
  for (auto* c : {lSolve, lBound}) {
    addLensInput(c, la);
    addOutputs(c, false);
  }
  SearchArgs sa;
  auto* lSearch = lens->add_subcommand("search", "seeded search for the maximal image count");
  lSearch->add_option("--masses", sa.N, "number of point masses")->capture_default_str();
  lSearch->add_option("--gamma", sa.gamma, "external shear")->capture_default_str();
  lSearch->add_option("--budget", sa.budget, "evaluation budget")->capture_default_str();
  addOutputs(lSearch, false);

  auto* curve = app.add_subcommand("curve", "boundary curve singularities")->require_subcommand(1);
  CurveArgs ca;
  auto* cAnalyze = curve->add_subcommand("analyze", "cusps, double points and census");
  auto* cPlot = curve->add_subcommand("plot", "SVG of the boundary curve");
  for (auto* c : {cAnalyze, cPlot}) {
    addCurveInput(c, ca);
    c->add_option("--csv-samples", ca.csvSamples, "rows in the CSV output")->capture_default_str();
    addOutputs(c, true);
  }

  auto* quad = app.add_subcommand("quad", "quadrature identity")->require_subcommand(1);
  QuadArgs qa;
  auto* qVerify = quad->add_subcommand("verify", "compare area and contour moments");
  qVerify->add_option("--known", qa.known, "catalog map: FAMILY DEGREE")->expected(2);
  qVerify->add_option("--poly", qa.poly, "Taylor coefficients JSON, or a file");
  qVerify->add_option("--kmax", qa.kmax, "highest moment")->capture_default_str();
  qVerify->add_option("--tol", qa.tol, "residual tolerance")->capture_default_str();
  addOutputs(qVerify, false);

  auto* insc = app.add_subcommand("inscribe", "inscription in a deltoid-like curve")->require_subcommand(1);
  InscribeArgs ia;
  auto* iCard = insc->add_subcommand("cardioid", "inscribe the genuine cardioid");
  auto* iCirc = insc->add_subcommand("circle", "inscribe a circle");
  for (auto* c : {iCard, iCirc}) {
    addInscribeInput(c, ia);
    addOutputs(c, false);
  }

  auto* suff = app.add_subcommand("suffridge", "extreme univalent maps")->require_subcommand(1);
  SuffridgeArgs xa;
  auto* sSearch = suff->add_subcommand("search", "extremalize from the symmetric start");
  sSearch->add_option("--family", xa.family, "S or Sigma")->capture_default_str();
  sSearch->add_option("--degree", xa.degree, "degree d")->capture_default_str();
  sSearch->add_option("--max-rounds", xa.opt.maxRounds, "walks attempted")->capture_default_str();
  sSearch->add_option("--step-fraction", xa.opt.stepFraction, "fraction of the univalent interval taken")
      ->capture_default_str();
  sSearch->add_option("--closure-tol", xa.opt.closureTol, "double point closure tolerance")->capture_default_str();
  sSearch->add_option("--delta-resolution", xa.opt.delta.relResolution, "bisection resolution")->capture_default_str();
  addOutputs(sSearch, false);

  auto* cons = app.add_subcommand("construct", "sharp connectivity configurations")->require_subcommand(1);
  ConstructArgs ka;
  auto* kU = cons->add_subcommand("uqd", "unbounded configuration");
  auto* kB = cons->add_subcommand("bqd", "bounded configuration");
  for (auto* c : {kU, kB}) {
    c->add_option("--partition", ka.partition, "node multiplicities, e.g. 2,1,1")->required()->delimiter(',');
    c->add_option("--oracle", ka.oracle, "raster oracle resolution, 0 to skip")->capture_default_str();
    c->add_option("--contact-tol", ka.contactTol, "contact tolerance relative to the scale")->capture_default_str();
    addOutputs(c, false);
  }
  kU->add_option("--infinity", ka.infinity, "multiplicity of the node at infinity, 0 for none")->capture_default_str();
  kU->add_option("--gamma", ka.gamma, "ellipse shear for a simple node at infinity")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "usage", e.what());
  }

  try {
    if (*lSolve) lensSolve(la, out);
    else if (*lBound) lensBound(la, out);
    else if (*lSearch) lensSearch(sa, out);
    else if (*cAnalyze) curveRun(ca, out, false);
    else if (*cPlot) curveRun(ca, out, true);
    else if (*qVerify) quadVerify(qa, out);
    else if (*iCard) inscribeRun(ia, out, false);
    else if (*iCirc) inscribeRun(ia, out, true);
    else if (*sSearch) suffridgeSearch(xa, out);
    else if (*kU) constructRun(ka, out, false);
    else if (*kB) constructRun(ka, out, true);
  } catch (const InputError& e) {
    return fail(1, "input error", e.what());
  } catch (const json::exception& e) {
    return fail(1, "input error", e.what());
  } catch (const InvariantViolation& e) {
    return fail(2, "invariant violation", e.what());
  } catch (const NumericalError& e) {
    return fail(2, "numerical error", e.what());
  } catch (const AlreadyExtreme& e) {
    return fail(1, "input error", e.what());
  }
  return 0;
}
