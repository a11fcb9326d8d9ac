#include "scottlab/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <sstream>

#include "scottlab/formula_io.hpp"
#include "scottlab/groups.hpp"
#include "scottlab/henkin.hpp"
#include "scottlab/model.hpp"
#include "scottlab/scott.hpp"
#include "scottlab/tree.hpp"

namespace scottlab {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return s.str();
}

namespace {

using json = nlohmann::ordered_json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State of one command run: the report, the bounds in force and the input
// digests, all of which go into the manifest.
struct Run {
  std::ostringstream out;
  std::map<std::string, std::uint64_t> bounds;
  std::map<std::string, std::string> inputs;
  std::optional<std::uint64_t> ceiling;
  std::string outcome = "ok";

  std::string read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    inputs[path] = sha256_hex(s.str());
    return s.str();
  }
  std::uint64_t bound(const std::string& name, std::uint64_t v) { return bounds[name] = v; }
  // The report text, closed by the bounds in force.
  std::string report() const {
    std::string r = out.str();
    if (!bounds.empty()) {
      r += "; bounds";
      for (const auto& [k, v] : bounds) r += " " + k + "=" + std::to_string(v);
      r += "\n";
    }
    return r;
  }
  std::uint64_t budget(const std::string& name, std::uint64_t requested) {
    std::uint64_t v = requested;
    if (ceiling && v > *ceiling) {
      v = *ceiling;
      out << "; " << name << " " << requested << " clamped to ceiling " << v << "\n";
    }
    return bound(name, v);
  }
};

std::vector<Formula> read_formulas(Run& run, const std::string& path) {
  std::vector<Formula> out;
  for (const auto& s : read_sexps(run.read(path))) out.push_back(parse_formula(s));
  if (out.empty()) throw InputError(path + " holds no formula");
  return out;
}

Formula read_formula(Run& run, const std::string& path) {
  auto fs = read_formulas(run, path);
  if (fs.size() != 1) throw InputError(path + " must hold exactly one formula");
  return fs[0];
}

FinStructure read_structure(Run& run, const std::string& path) { return parse_structure(run.read(path)); }
GroupOracle read_group(Run& run, const std::string& path) { return parse_group(run.read(path)); }

std::string tuple_text(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + std::to_string(t[i]);
  return s + ")";
}

std::string elements_text(const GroupOracle& g, const std::vector<GroupElement>& xs) {
  std::string s = "(";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + g.print_element(xs[i]);
  return s + ")";
}

Tuple parse_tuple(const std::string& text, std::size_t n) {
  Tuple t;
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  long long x;
  while (in >> x) {
    if (x < 0 || static_cast<std::size_t>(x) >= n) throw InputError("tuple element " + std::to_string(x) + " out of range");
    t.push_back(static_cast<Element>(x));
  }
  if (!in.eof()) throw InputError("malformed tuple '" + text + "'");
  return t;
}

// Option storage, one instance per run.
struct FormulaOpts {
  std::string file;
  std::uint64_t alpha = 1;
  std::string other;
  std::uint64_t k = 1;
};

struct ScottOpts {
  std::string file;
  std::string sentence;
  std::string style = "covering";
  std::optional<std::uint64_t> length_bound;
  std::uint64_t max_size = 3;
  std::uint64_t budget = 64;
};

struct HenkinOpts {
  std::string structure;
  std::string target;
  std::string phi_file;
  std::string psi_file;
  std::string sigma_file;
  std::string pi_file;
  std::string tuple;
  std::uint64_t alpha = 2;
  std::uint64_t steps = 50;
  std::uint64_t constants = 0;
  std::uint64_t schema_budget = 16;
  std::uint64_t eval_budget = 64;
  std::uint64_t budget = 1'000'000;
  std::uint64_t bound = 4;
  std::uint64_t max_size = 4;
};

struct GroupOpts {
  std::string file;
  std::string phi_file;
  std::string sentence_file;
  std::vector<std::string> against;
  std::uint64_t radius = 4;
  std::uint64_t length = 3;
  std::uint64_t budget = 32;
};

struct TreeOpts {
  std::string trace_file;
  std::string flavor = "A";
  std::string sentence_file;
  std::uint64_t depth = 5;
  std::uint64_t copies = 2;
  std::uint64_t count = 2;
  std::uint64_t special_count = 1;
  std::uint64_t budget = 64;
  bool isolate = false;
};

// ---- formula, structure, orbits ----

void add_formula_commands(CLI::App& app, std::vector<std::pair<CLI::App*, std::function<int(Run&)>>>& h, FormulaOpts& op) {
  auto* f = app.add_subcommand("formula", "Formula utilities")->require_subcommand(1);
  auto* c = f->add_subcommand("classify", "Print (side, rank) of each formula");
  c->add_option("file", op.file)->required();
  h.emplace_back(c, [&op](Run& run) {
    for (const auto& phi : read_formulas(run, op.file)) run.out << to_string(classify(phi)) << "\n";
    return kExitOk;
  });
  auto* n = f->add_subcommand("negate", "Print the normal-form negation of each formula");
  n->add_option("file", op.file)->required();
  h.emplace_back(n, [&op](Run& run) {
    for (const auto& phi : read_formulas(run, op.file)) run.out << print_formula(negate(phi)) << "\n";
    return kExitOk;
  });
  auto* p = f->add_subcommand("print", "Print each formula in canonical form");
  p->add_option("file", op.file)->required();
  h.emplace_back(p, [&op](Run& run) {
    for (const auto& phi : read_formulas(run, op.file)) run.out << print_formula(phi) << "\n";
    return kExitOk;
  });
  auto* d = f->add_subcommand("d-sigma", "Whether each formula is d-Sigma_alpha");
  d->add_option("file", op.file)->required();
  d->add_option("--alpha", op.alpha, "Level")->capture_default_str();
  h.emplace_back(d, [&op](Run& run) {
    run.bound("alpha", op.alpha);
    for (const auto& phi : read_formulas(run, op.file))
      run.out << (is_d_sigma(phi, Ordinal::finite(op.alpha)) ? "true" : "false") << "\n";
    return kExitOk;
  });

  auto* s = app.add_subcommand("structure", "Structure utilities")->require_subcommand(1);
  auto* sp = s->add_subcommand("print", "Validate and print a structure canonically");
  sp->add_option("file", op.file)->required();
  h.emplace_back(sp, [&op](Run& run) {
    run.out << print_structure(read_structure(run, op.file)) << "\n";
    return kExitOk;
  });
  auto* si = s->add_subcommand("iso", "Least isomorphism between two structures");
  si->add_option("a", op.file)->required();
  si->add_option("b", op.other)->required();
  h.emplace_back(si, [&op](Run& run) {
    auto a = read_structure(run, op.file);
    auto b = read_structure(run, op.other);
    auto iso = isomorphic(a, b);
    run.out << (iso ? "isomorphic " + tuple_text(*iso) : std::string("not isomorphic")) << "\n";
    run.outcome = iso ? "isomorphic" : "not isomorphic";
    return kExitOk;
  });
  auto* o = app.add_subcommand("orbits", "Automorphism orbits of k-tuples");
  o->add_option("file", op.file)->required();
  o->add_option("-k,--k", op.k, "Tuple length")->capture_default_str();
  h.emplace_back(o, [&op](Run& run) {
    auto a = read_structure(run, op.file);
    run.bound("k", op.k);
    auto blocks = automorphism_orbits(a, op.k);
    run.out << "automorphisms " << automorphisms(a).size() << "\n";
    run.out << "orbits " << blocks.size() << "\n";
    for (const auto& b : blocks) {
      run.out << "(orbit";
      for (const auto& t : b) run.out << " " << tuple_text(t);
      run.out << ")\n";
    }
    run.outcome = std::to_string(blocks.size()) + " orbits";
    return kExitOk;
  });
}

// ---- scott ----

void write_verify(Run& run, const VerifyReport& r) {
  run.out << "checked " << r.checked << "\n";
  run.out << "copies-of-A " << r.copies_found << "\n";
  run.out << "false-positives " << r.false_positives.size() << "\n";
  run.out << "false-negatives " << r.false_negatives.size() << "\n";
  run.out << "unknowns " << r.unknowns.size() << "\n";
  const std::size_t mismatches = r.false_positives.size() + r.false_negatives.size() + r.unknowns.size();
  run.out << "mismatches " << mismatches << "\n";
  auto list = [&](const char* kind, const std::vector<VerifyEntry>& es) {
    for (const auto& e : es)
      run.out << "(mismatch (kind " << kind << ") (size " << e.size << ") (index " << e.index << ") (verdict "
              << to_string(e.verdict) << "))\n";
  };
  list("false-positive", r.false_positives);
  list("false-negative", r.false_negatives);
  list("unknown", r.unknowns);
  run.outcome = r.ok() ? "verified" : std::to_string(mismatches) + " mismatches";
}

void add_scott_commands(CLI::App& app, std::vector<std::pair<CLI::App*, std::function<int(Run&)>>>& h, ScottOpts& op) {
  auto* s = app.add_subcommand("scott", "Scott sentences of finite structures")->require_subcommand(1);
  auto* syn = s->add_subcommand("synth", "Synthesize a Scott sentence");
  syn->add_option("file", op.file)->required();
  syn->add_option("--style", op.style, "covering (Pi_3 from Sigma_2 orbits), diagram (Pi_2), or sigma2")
      ->check(CLI::IsMember({"covering", "diagram", "sigma2"}))
      ->capture_default_str();
  syn->add_option("--length", op.length_bound, "Orbit family tuple-length bound");
  h.emplace_back(syn, [&op](Run& run) {
    auto a = read_structure(run, op.file);
    Formula phi;
    if (op.style == "sigma2") {
      phi = sigma2_scott_sentence(a);
    } else {
      auto fam = orbit_family(a, op.style == "covering" ? OrbitStyle::Covering : OrbitStyle::Diagram, op.length_bound);
      run.bound("length", fam.length_bound);
      phi = scott_sentence_from_orbits(a, fam);
    }
    run.out << "; class " << to_string(classify(phi)) << "\n" << print_formula(phi) << "\n";
    return kExitOk;
  });
  auto* ver = s->add_subcommand("verify", "Check a sentence against every structure up to a size");
  ver->add_option("--sentence", op.sentence)->required();
  ver->add_option("--structure", op.file)->required();
  ver->add_option("--max-size", op.max_size)->capture_default_str();
  ver->add_option("--budget", op.budget, "Schema evaluation budget")->capture_default_str();
  h.emplace_back(ver, [&op](Run& run) {
    auto phi = read_formula(run, op.sentence);
    auto a = read_structure(run, op.file);
    auto r = verify_scott_sentence(phi, a, run.bound("max-size", op.max_size), run.budget("budget", op.budget));
    write_verify(run, r);
    return r.ok() ? kExitOk : kExitMismatch;
  });
}

// ---- henkin ----

void add_henkin_commands(CLI::App& app, std::vector<std::pair<CLI::App*, std::function<int(Run&)>>>& h, HenkinOpts& op) {
  auto* hk = app.add_subcommand("henkin", "Consistency-property search")->require_subcommand(1);

  auto extract_opts = [&op](Run& run) {
    ExtractOptions o;
    o.budget = run.budget("budget", op.budget);
    o.eval_budget = run.budget("eval-budget", op.eval_budget);
    o.schema_budget = run.budget("schema-budget", op.schema_budget);
    return o;
  };

  auto* b = hk->add_subcommand("build", "Build a model chain and print its transcript");
  b->add_option("--structure", op.structure)->required();
  b->add_option("--alpha", op.alpha)->capture_default_str();
  b->add_option("--steps", op.steps)->capture_default_str();
  b->add_option("--target", op.target, "Target sentence file");
  b->add_option("--constants", op.constants, "Constant pool size (0 = |A|)")->capture_default_str();
  b->add_option("--schema-budget", op.schema_budget)->capture_default_str();
  b->add_option("--eval-budget", op.eval_budget)->capture_default_str();
  h.emplace_back(b, [&op](Run& run) {
    auto a = read_structure(run, op.structure);
    std::optional<Formula> tgt;
    if (!op.target.empty()) tgt = read_formula(run, op.target);
    SessionConfig cfg;
    cfg.constants = run.bound("constants", op.constants);
    cfg.schema_budget = run.budget("schema-budget", op.schema_budget);
    cfg.eval_budget = run.budget("eval-budget", op.eval_budget);
    ConsistencySession session(a, Ordinal::finite(run.bound("alpha", op.alpha)), tgt, cfg);
    auto r = build_model_chain(session, run.bound("steps", op.steps));
    for (const auto& e : r.transcript) {
      run.out << "(step " << e.step << " (demand " << e.demand << ")";
      for (const auto& s : e.added) run.out << "\n  (added " << s << ")";
      run.out << "\n  (witness";
      for (auto [c, x] : e.witness) run.out << " (#" << c << " " << x << ")";
      run.out << "))\n";
    }
    run.out << "chain-length " << r.chain.size() << "\n";
    run.out << "undecided " << r.undecided << "\n";
    run.out << "pending " << r.pending << "\n";
    if (r.blocked) run.out << "blocked " << describe(*r.blocked) << ": " << r.blocked_reason << "\n";
    run.out << print_structure(r.structure) << "\n";
    run.outcome = r.blocked ? "blocked" : std::to_string(r.chain.size()) + " sets";
    return kExitOk;
  });

  auto* x = hk->add_subcommand("extract-orbit", "Orbit-generating formula of a tuple, checked against the orbit");
  x->add_option("--structure", op.structure)->required();
  x->add_option("--tuple", op.tuple, "Elements, separated by spaces or commas")->required();
  x->add_option("--alpha", op.alpha)->capture_default_str();
  x->add_option("--budget", op.budget, "Candidate sets examined")->capture_default_str();
  x->add_option("--eval-budget", op.eval_budget)->capture_default_str();
  x->add_option("--schema-budget", op.schema_budget)->capture_default_str();
  h.emplace_back(x, [&op, extract_opts](Run& run) {
    auto a = read_structure(run, op.structure);
    auto t = parse_tuple(op.tuple, a.size());
    auto opt = extract_opts(run);
    auto phi = extract_orbit_generator(a, t, Ordinal::finite(run.bound("alpha", op.alpha)), opt);
    run.out << "; class " << to_string(classify(phi)) << "\n" << print_formula(phi) << "\n";
    auto got = satisfying_tuples(a, phi, t.size(), opt.eval_budget);
    std::vector<Tuple> orbit;
    for (const auto& blk : automorphism_orbits(a, t.size()))
      if (std::find(blk.begin(), blk.end(), t) != blk.end()) orbit = blk;
    const bool ok = got == orbit;
    run.out << "orbit-size " << orbit.size() << "\nsatisfying " << got.size() << "\n"
            << (ok ? "matches orbit" : "MISMATCH with orbit") << "\n";
    run.outcome = ok ? "matches orbit" : "mismatch";
    return ok ? kExitOk : kExitMismatch;
  });

  auto* sp = hk->add_subcommand("separate", "Separator for two Pi_alpha sentences with no common model");
  sp->add_option("--phi", op.phi_file, "Sentence true in A")->required();
  sp->add_option("--psi", op.psi_file, "Opposing sentence")->required();
  sp->add_option("--structure", op.structure)->required();
  sp->add_option("--bound", op.bound, "Sweep bound")->capture_default_str();
  sp->add_option("--budget", op.budget, "Candidate sets examined")->capture_default_str();
  sp->add_option("--eval-budget", op.eval_budget)->capture_default_str();
  sp->add_option("--schema-budget", op.schema_budget)->capture_default_str();
  h.emplace_back(sp, [&op, extract_opts](Run& run) {
    auto phi = read_formula(run, op.phi_file);
    auto psi = read_formula(run, op.psi_file);
    auto a = read_structure(run, op.structure);
    auto opt = extract_opts(run);
    auto sep = extract_separator(phi, psi, a, run.bound("bound", op.bound), opt);
    run.out << "; class " << to_string(classify(sep)) << "\n" << print_formula(sep) << "\n";
    if (sep.kind() == Kind::And && !sep.is_schema())
      for (const auto& c : sep.children()) run.out << "; conjunct " << to_string(classify(c)) << "\n";
    std::size_t bad = 0, opposing = 0;
    if (evaluate(a, sep, {}, opt.eval_budget) != Verdict3::True) {
      run.out << "MISMATCH: separator not True on A\n";
      ++bad;
    }
    for (std::size_t n = 1; n <= op.bound; ++n)
      for_each_structure(a.signature(), n, [&](const FinStructure& b) {
        if (evaluate(b, psi, {}, opt.eval_budget) != Verdict3::True) return true;
        ++opposing;
        if (evaluate(b, sep, {}, opt.eval_budget) != Verdict3::False) {
          run.out << "MISMATCH: separator not False on opposing model\n" << print_structure(b) << "\n";
          ++bad;
        }
        return true;
      });
    run.out << "opposing-models " << opposing << "\nmismatches " << bad << "\n";
    run.outcome = bad ? std::to_string(bad) + " mismatches" : "separates";
    return bad ? kExitMismatch : kExitOk;
  });

  auto* d = hk->add_subcommand("dsigma", "d-Sigma Scott sentence from a Sigma/Pi pair, then verified");
  d->add_option("--structure", op.structure)->required();
  d->add_option("--sigma", op.sigma_file, "Sigma_{alpha+1} Scott sentence (default: the Sigma_2 one)");
  d->add_option("--pi", op.pi_file, "Pi_{alpha+1} Scott sentence (default: from Sigma_1 orbit formulas)");
  d->add_option("--max-size", op.max_size)->capture_default_str();
  d->add_option("--budget", op.budget, "Candidate sets examined")->capture_default_str();
  d->add_option("--eval-budget", op.eval_budget)->capture_default_str();
  d->add_option("--schema-budget", op.schema_budget)->capture_default_str();
  h.emplace_back(d, [&op, extract_opts](Run& run) {
    auto a = read_structure(run, op.structure);
    auto sigma = op.sigma_file.empty() ? sigma2_scott_sentence(a) : read_formula(run, op.sigma_file);
    auto pi = op.pi_file.empty() ? scott_sentence_from_orbits(a, orbit_family(a, OrbitStyle::Diagram))
                              : read_formula(run, op.pi_file);
    auto opt = extract_opts(run);
    auto out = d_sigma_scott_from_pair(a, sigma, pi, opt);
    run.out << "; class " << to_string(classify(out)) << "\n" << print_formula(out) << "\n";
    run.out << "d-sigma-1 " << (is_d_sigma(out, Ordinal::finite(1)) ? "true" : "false") << "\n";
    auto r = verify_scott_sentence(out, a, run.bound("max-size", op.max_size), opt.eval_budget);
    write_verify(run, r);
    return r.ok() ? kExitOk : kExitMismatch;
  });
}

// ---- group ----

void add_group_commands(CLI::App& app, std::vector<std::pair<CLI::App*, std::function<int(Run&)>>>& h, GroupOpts& op) {
  auto* g = app.add_subcommand("group", "Finitely generated groups")->require_subcommand(1);
  auto bounds = [&op](CLI::App* sub) {
    sub->add_option("group", op.file, "Group description file")->required();
    sub->add_option("--radius", op.radius)->capture_default_str();
    sub->add_option("--length", op.length)->capture_default_str();
    sub->add_option("--budget", op.budget, "Schema children per connective")->capture_default_str();
  };

  auto* s3 = g->add_subcommand("scott3", "Sigma_3 Scott sentence, checked on the home ball");
  bounds(s3);
  h.emplace_back(s3, [&op](Run& run) {
    auto gr = read_group(run, op.file);
    auto phi = sigma3_scott(gr, run.bound("length", op.length));
    run.out << "; class " << to_string(classify(phi)) << "\n" << print_formula(phi) << "\n";
    auto v = bounded_model_check(gr, phi, run.bound("radius", op.radius), run.budget("budget", op.budget));
    run.out << "home " << to_string(v) << "\n";
    run.outcome = to_string(v);
    return kExitOk;
  });

  auto* d2 = g->add_subcommand("dsigma2", "d-Sigma_2 sentence from a Pi_1 orbit formula");
  bounds(d2);
  d2->add_option("--phi", op.phi_file, "Pi_1 orbit formula in x1..xk (default: the documented one)");
  d2->add_option("--against", op.against, "Other group files to check the sentence on");
  h.emplace_back(d2, [&op](Run& run) {
    auto gr = read_group(run, op.file);
    Formula phi;
    if (!op.phi_file.empty()) {
      phi = read_formula(run, op.phi_file);
    } else if (auto doc = documented_pi1_orbit(gr)) {
      phi = *doc;
    } else {
      throw InputError("no documented Pi_1 orbit formula for " + gr.describe() + "; pass --phi");
    }
    auto rep = ho_d_sigma2(gr, phi, run.bound("length", op.length), run.bound("radius", op.radius),
                           run.budget("budget", op.budget));
    run.out << "; class " << to_string(classify(rep.sentence)) << "\n" << print_formula(rep.sentence) << "\n";
    run.out << "d-sigma-2 " << (is_d_sigma(rep.sentence, Ordinal::finite(2)) ? "true" : "false") << "\n";
    run.out << "phi-at-generators " << to_string(rep.phi_at_generators) << "\n";
    run.out << "hypothesis " << rep.hypothesis << "\n";
    auto home = bounded_model_check(gr, rep.sentence, op.radius, op.budget);
    run.out << "home " << to_string(home) << "\n";
    for (const auto& path : op.against) {
      auto other = read_group(run, path);
      run.out << "against " << other.describe() << " " << to_string(bounded_model_check(other, rep.sentence, op.radius, op.budget))
              << "\n";
    }
    run.outcome = "home " + to_string(home);
    return kExitOk;
  });

  auto* po = g->add_subcommand("pi1-orbit", "Pi_1 orbit formula from a Sigma_2 one");
  bounds(po);
  po->add_option("--sigma2", op.phi_file, "Sigma_2 orbit formula in x1..xk")->required();
  h.emplace_back(po, [&op](Run& run) {
    auto gr = read_group(run, op.file);
    auto sigma2 = read_formula(run, op.phi_file);
    auto r = extract_pi1_orbit(gr, sigma2, gr.generators(), run.bound("radius", op.radius), run.budget("budget", op.budget));
    run.out << "; class " << to_string(classify(r.formula)) << "\n" << print_formula(r.formula) << "\n";
    run.out << "disjunct " << r.disjunct << "\nwitness " << elements_text(gr, r.witness) << "\nwords";
    for (const auto& w : r.words) run.out << " " << to_string(w);
    run.out << "\n";
    return kExitOk;
  });

  auto* sr = g->add_subcommand("self-reflect", "Bounded search for a self-reflective witness");
  bounds(sr);
  h.emplace_back(sr, [&op](Run& run) {
    auto gr = read_group(run, op.file);
    auto r = self_reflective_search(gr, gr.generators(), run.bound("radius", op.radius), run.bound("length", op.length));
    for (const auto& n : r.notes) run.out << "; " << n << "\n";
    run.out << "candidates " << r.candidates << "\nbattery " << r.battery.size() << "\n";
    for (const auto& c : r.rejected) {
      run.out << "(rejected " << elements_text(gr, c.tuple);
      if (c.failed_items.empty()) {
        run.out << " (generates))\n";
      } else {
        run.out << " (fails " << print_formula(r.battery[c.failed_items.front()].formula) << "))\n";
      }
    }
    const std::string verdict =
        r.witness_found ? "Witness" + elements_text(gr, r.witness)
                        : "NoneUpToBound(radius=" + std::to_string(op.radius) + ", length=" + std::to_string(op.length) + ")";
    run.out << "verdict " << verdict << "\n";
    run.outcome = verdict;
    return kExitOk;
  });

  auto* rel = g->add_subcommand("relators", "Truncated relator schema at the generators");
  bounds(rel);
  h.emplace_back(rel, [&op](Run& run) {
    auto gr = read_group(run, op.file);
    auto phi = relator_schema(gr, gr.generators(), run.bound("length", op.length));
    run.out << "; class " << to_string(classify(phi)) << "\n" << print_formula(phi) << "\n";
    GroupAssignment at;
    auto xs = group_vars(gr.rank());
    for (std::size_t i = 0; i < xs.size(); ++i) at[xs[i]] = gr.generators()[i];
    auto v = bounded_model_check(gr, phi, run.bound("radius", op.radius), run.budget("budget", op.budget), at);
    run.out << "at-generators " << to_string(v) << "\n";
    run.outcome = to_string(v);
    return kExitOk;
  });

  auto* ck = g->add_subcommand("check", "Bounded model check of sentences");
  bounds(ck);
  ck->add_option("--sentence", op.sentence_file)->required();
  h.emplace_back(ck, [&op](Run& run) {
    auto gr = read_group(run, op.file);
    for (const auto& phi : read_formulas(run, op.sentence_file))
      run.out << to_string(bounded_model_check(gr, phi, run.bound("radius", op.radius), run.budget("budget", op.budget)))
              << "\n";
    return kExitOk;
  });
}

// ---- tree ----

void add_tree_commands(CLI::App& app, std::vector<std::pair<CLI::App*, std::function<int(Run&)>>>& h, TreeOpts& op) {
  auto* t = app.add_subcommand("tree", "Staged tree and path structures")->require_subcommand(1);
  auto common = [&op](CLI::App* sub) {
    sub->add_option("--trace", op.trace_file, "Trace file (default: empty trace)");
    sub->add_option("--depth", op.depth)->capture_default_str();
  };
  auto tree_of = [&op](Run& run) {
    std::vector<TraceEntry> trace;
    if (!op.trace_file.empty()) trace = parse_trace(run.read(op.trace_file));
    return build_tree(std::move(trace), run.bound("depth", op.depth));
  };
  auto path_opts = [&op](CLI::App* sub) {
    sub->add_option("--copies", op.copies)->capture_default_str();
    sub->add_option("--special-count", op.special_count, "Special elements in B")->capture_default_str();
    sub->add_flag("--isolate-special", op.isolate, "Leave the special prefix out of A");
  };
  auto opts_of = [&op](Run& run) {
    PathOptions o;
    o.special_count = run.bound("special-count", op.special_count);
    o.isolate_special = op.isolate;
    if (op.isolate) run.bound("isolate-special", 1);
    return o;
  };

  auto* b = t->add_subcommand("build", "Print the tree as a sorted node list");
  common(b);
  h.emplace_back(b, [&op, tree_of](Run& run) {
    auto tr = tree_of(run);
    run.out << print_tree(tr) << "\n";
    auto bad = tr.check_invariants();
    for (const auto& s : bad) run.out << "; invariant violated: " << s << "\n";
    run.outcome = bad.empty() ? "invariants hold" : "invariants violated";
    return bad.empty() ? kExitOk : kExitMismatch;
  });

  auto* e = t->add_subcommand("emit-structure", "Print A-approx or B-approx");
  common(e);
  path_opts(e);
  e->add_option("--flavor", op.flavor)->check(CLI::IsMember({"A", "B"}))->capture_default_str();
  h.emplace_back(e, [&op, tree_of, opts_of](Run& run) {
    auto tr = tree_of(run);
    auto ps = build_structure(tr, op.flavor == "A" ? PathFlavor::A : PathFlavor::B, op.depth,
                              run.bound("copies", op.copies), opts_of(run));
    for (std::size_t i = 0; i < ps.labels.size(); ++i)
      run.out << "; " << i << " " << print_node(ps.labels[i]) << (ps.special[i] ? " special" : "") << "\n";
    run.out << print_structure(ps.structure) << "\n";
    return kExitOk;
  });

  auto* ax = t->add_subcommand("axioms", "Emit the axioms and check them on A-approx");
  common(ax);
  ax->add_option("--count", op.count, "Largest counting quantifier")->capture_default_str();
  h.emplace_back(ax, [&op, tree_of](Run& run) {
    auto tr = tree_of(run);
    auto a = build_structure(tr, PathFlavor::A, op.depth, op.count);
    std::size_t failed = 0;
    for (const auto& f : tree_axioms(tr, op.depth, run.bound("count", op.count))) {
      auto v = evaluate(a.structure, f, {}, 64);
      if (v != Verdict3::True) ++failed;
      run.out << print_formula(f) << "\n";
      if (v != Verdict3::True) run.out << "; " << to_string(v) << " on A-approx\n";
    }
    run.out << "; failing on A-approx with " << op.count << " copies: " << failed << "\n";
    run.outcome = failed ? std::to_string(failed) + " axioms fail" : "all axioms True on A-approx";
    return failed ? kExitMismatch : kExitOk;
  });

  auto* pr = t->add_subcommand("probe", "Evaluate a Sigma_2 sentence on B-approx and A-approx");
  common(pr);
  path_opts(pr);
  pr->add_option("--sentence", op.sentence_file)->required();
  pr->add_option("--budget", op.budget)->capture_default_str();
  h.emplace_back(pr, [&op, tree_of, opts_of](Run& run) {
    auto tr = tree_of(run);
    auto phi = read_formula(run, op.sentence_file);
    auto r = sigma2_transfer_probe(tr, phi, op.depth, run.bound("copies", op.copies), opts_of(run),
                                   run.budget("budget", op.budget));
    run.out << "B-approx " << to_string(r.on_b) << "\nA-approx " << to_string(r.on_a) << "\n";
    run.out << (r.flagged ? "flagged " : "") << r.explanation << "\n";
    run.outcome = r.flagged ? "flagged" : "no counterexample";
    return kExitOk;
  });
}

// Strips --out/--manifest so the manifest records only what shapes the report.
std::vector<std::string> report_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--out" || a == "--manifest") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--manifest=", 0) == 0) continue;
    out.push_back(a);
  }
  return out;
}

int run_command(const std::vector<std::string>& args, std::optional<std::uint64_t> ceiling, Run& run,
                std::string& out_path, std::string& manifest_path, std::ostream& out, std::ostream& err);

int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  json m;
  try {
    std::ifstream in(manifest_path);
    if (!in) throw InputError("cannot read " + manifest_path);
    m = json::parse(in);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (m.value("tool", "") != kToolVersion) err << "warning: manifest written by " << m.value("tool", "?") << "\n";
  for (const auto& [path, digest] : m["inputs"].items()) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    if (!in || sha256_hex(s.str()) != digest.get<std::string>()) {
      err << "error: input " << path << " is missing or changed since the manifest was written\n";
      return kExitInput;
    }
  }
  std::optional<std::uint64_t> ceiling;
  if (!m["budget_ceiling"].is_null()) ceiling = m["budget_ceiling"].get<std::uint64_t>();
  Run run;
  std::string op, mp;
  std::ostringstream sink;
  const int code = run_command(m["command"].get<std::vector<std::string>>(), ceiling, run, op, mp, sink, err);
  const std::string digest = sha256_hex(run.report());
  const bool same = digest == m.value("report_sha256", "") && code == m.value("exit_code", -1);
  out << (same ? "identical" : "DIFFERS") << " report_sha256 " << digest << " exit " << code << "\n";
  return same ? kExitOk : kExitMismatch;
}

int run_command(const std::vector<std::string>& args, std::optional<std::uint64_t> ceiling, Run& run,
                std::string& out_path, std::string& manifest_path, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infinitary-logic and Scott-sentence laboratory", "scottlab"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", out_path, "Write the report to this file");
  app.add_option("--manifest", manifest_path, "Write a JSON run manifest to this file");
  std::vector<std::pair<CLI::App*, std::function<int(Run&)>>> handlers;
  FormulaOpts formula_opts;
  ScottOpts scott_opts;
  HenkinOpts henkin_opts;
  GroupOpts group_opts;
  TreeOpts tree_opts;
  add_formula_commands(app, handlers, formula_opts);
  add_scott_commands(app, handlers, scott_opts);
  add_henkin_commands(app, handlers, henkin_opts);
  add_group_commands(app, handlers, group_opts);
  add_tree_commands(app, handlers, tree_opts);
  std::string replay_file;
  auto* rp = app.add_subcommand("replay", "Re-run a manifest and compare the report digest");
  rp->add_option("manifest", replay_file)->required();

  std::vector<std::string> argv_store{"scottlab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  if (*rp) return replay(replay_file, out, err);

  run.ceiling = ceiling;
  if (ceiling) run.bounds["budget-ceiling"] = *ceiling;
  for (auto& [sub, handler] : handlers) {
    if (!*sub) continue;
    try {
      return handler(run);
    } catch (const HenkinBudgetExceeded& e) {
      run.out << "budget exhausted: " << e.what() << "\n";
      for (const auto& f : e.frontier) run.out << "; frontier " << f << "\n";
      run.outcome = "budget exhausted";
      return kExitBudget;
    } catch (const EnumerationRefused& e) {
      run.out << "budget exhausted: " << e.what() << "\n";
      run.outcome = "budget exhausted";
      return kExitBudget;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      run.outcome = std::string("input error: ") + e.what();
      return kExitInput;
    }
  }
  err << "error: no command\n";
  return kExitInput;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<std::uint64_t> ceiling;
  if (const char* env = std::getenv(kBudgetCeilingEnv)) {
    try {
      ceiling = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: " << kBudgetCeilingEnv << " must be a natural number\n";
      return kExitInput;
    }
  }
  Run run;
  std::string out_path, manifest_path;
  const int code = run_command(args, ceiling, run, out_path, manifest_path, out, err);
  const std::string report = run.report();
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << out_path << "\n";
      return kExitInput;
    }
    f << report;
  } else {
    out << report;
  }
  if (!manifest_path.empty()) {
    json m;
    m["tool"] = kToolVersion;
    m["command"] = report_args(args);
    m["inputs"] = run.inputs;
    m["bounds"] = run.bounds;
    m["budget_ceiling"] = ceiling ? json(*ceiling) : json(nullptr);
    m["exit_code"] = code;
    m["outcome"] = run.outcome;
    m["report_sha256"] = sha256_hex(report);
    std::ofstream f(manifest_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << manifest_path << "\n";
      return kExitInput;
    }
    f << m.dump(2) << "\n";
  }
  return code;
}

}  // namespace scottlab
