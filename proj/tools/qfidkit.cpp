// Copyright 2026 The qfidkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qfidkit/commands.hpp"

namespace {

int emit(const qfid::CommandResult& r, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << r.text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return qfid::kExitUsage;
    }
    f << r.text;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfidkit: fidelity, typical-subspace and coherent-information toolkit"};
  app.set_version_flag("--version", std::string(qfid::kVersion));
  app.require_subcommand(1);
  std::string out;

  qfid::CheckOptions check;
  auto* c = app.add_subcommand("check", "Run randomized lemma checks");
  c->add_option("--lemma", check.lemma, "Lemma selector")->check(CLI::IsMember(qfid::lemma_names()));
  c->add_option("--trials", check.trials, "Trials per lemma");
  c->add_option("--dim", check.dim, "Largest sampled dimension");
  c->add_option("--seed", check.seed, "Sweep seed");
  c->add_option("--out", out, "Report path (default stdout)");

  qfid::CoherentInfoOptions ci;
  std::string params = "0.1";
  std::string ns = "1";
  auto* h = app.add_subcommand("coherent-info", "Maximize coherent information over inputs");
  h->add_option("--channel", ci.channel, "Zoo channel")->check(CLI::IsMember(std::vector<std::string>(
                                                              qfid::kZooNames.begin(), qfid::kZooNames.end())));
  h->add_option("--param", params, "Parameter list a,b,c or range start:stop:step");
  h->add_option("--n", ns, "Block lengths, e.g. 1,2");
  h->add_option("--seed", ci.seed, "Optimizer seed");
  h->add_option("--out", out, "CSV path (default stdout)");

  qfid::TypicalOptions typ;
  auto* t = app.add_subcommand("typical", "Typical subspace of an i.i.d. diagonal source");
  t->add_option("--base", typ.base, "Base eigenvalues, e.g. 0.9,0.1");
  t->add_option("--n", typ.n, "Block length");
  t->add_option("--eps", typ.eps, "Window half-width epsilon");
  t->add_option("--delta", typ.delta, "delta for the dimension lower bound");
  t->add_option("--out", out, "Report path (default stdout)");

  std::string qbase = "0.9,0.1";
  std::string qn = "4:12";
  double qeps = 0.15;
  auto* q = app.add_subcommand("qaep", "Typical weight and dimension across block lengths (CSV)");
  q->add_option("--base", qbase, "Base eigenvalues");
  q->add_option("--n", qn, "Block-length range first:last");
  q->add_option("--eps", qeps, "Window half-width epsilon");
  q->add_option("--out", out, "CSV path (default stdout)");

  qfid::StripOptions strip;
  auto* s = app.add_subcommand("strip", "Support-stripping ensemble");
  s->add_option("--input", strip.input, "JSON with rho and op");
  s->add_option("--base", strip.base, "Diagonal state when no input file is given");
  s->add_option("--channel", strip.channel, "Zoo channel when no input file is given");
  s->add_option("--param", strip.param, "Channel parameter");
  s->add_option("--n0", strip.n0, "Number of states to strip");
  s->add_option("--seed", strip.seed, "Optimizer seed");
  s->add_option("--out", out, "Report path (default stdout)");

  qfid::ExtractOptions ext;
  auto* x = app.add_subcommand("extract", "Partial-isometry extraction");
  x->add_option("--input", ext.input, "JSON with rho, E and A");
  x->add_option("--fixture", ext.fixture, "perfect, unitary or perturbed");
  x->add_option("--seed", ext.seed, "Fixture seed");
  x->add_option("--out", out, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qfid::kExitUsage;
  }

  try {
    if (*c) {
      check.workers = qfid::workers_from_env();
      return emit(qfid::cmd_check(check), out);
    }
    if (*h) {
      ci.params = qfid::parse_param_list(params, "--param");
      ci.ns = qfid::parse_int_list(ns, "--n");
      ci.workers = qfid::workers_from_env();
      return emit(qfid::cmd_coherent_info(ci), out);
    }
    if (*t) return emit(qfid::cmd_typical(typ), out);
    if (*q) {
      const auto [first, last] = qfid::parse_int_range(qn, "--n");
      return emit(qfid::cmd_qaep(qbase, qeps, first, last), out);
    }
    if (*s) return emit(qfid::cmd_strip(strip), out);
    if (*x) return emit(qfid::cmd_extract(ext), out);
  } catch (const qfid::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return qfid::kExitUsage;
  } catch (const qfid::ResourceError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return qfid::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qfid::kExitViolation;
  }
  return qfid::kExitUsage;
}
