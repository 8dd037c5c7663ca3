// opsys: membership, certificates, and experiments for operator-system
// tensor cones. Machine-readable JSON goes to stdout, human summaries to
// stderr. Exit codes: 0 affirmative verdict, 1 well-formed negative verdict,
// 2 input error, 3 internal validation failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "opsys/experiment.hpp"
#include "opsys/json_io.hpp"

using namespace opsys;

namespace {

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path);
    if (!f) throw input_error("cannot open input file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json load_json(const std::string& path) { return parse_text(read_input(path)); }

struct Emit {
    bool pretty = false;
    int code = 0;
    void operator()(const json& machine, const std::string& human, int exit_code) {
        std::cout << (pretty ? machine.dump(2) : machine.dump()) << "\n";
        std::cerr << human << "\n";
        code = exit_code;
    }
};

CpMap map_from_json(const json& j) {
    if (!j.is_object() || !j.contains("domain") || !j.contains("images"))
        throw input_error("schema: map needs domain, codomain, images");
    auto dom = system_from_json(j["domain"]);
    std::vector<ComplexMatrix> images;
    for (const auto& m : j["images"]) images.push_back(matrix_from_json(m));
    const std::size_t q = j.contains("codomain") ? j["codomain"].get<std::size_t>()
                                                 : (images.empty() ? 0 : images[0].rows());
    return CpMap(std::move(dom), q, std::move(images));
}

json verdict_json(const PsdVerdict& v) {
    json j;
    j["verdict"] = v.positive ? "positive" : "not_positive";
    j["lambda_min"] = v.lambda_min;
    if (!v.positive && !v.witness.empty()) {
        json w = json::array();
        for (const auto& z : v.witness) w.push_back({z.real(), z.imag()});
        j["witness"] = std::move(w);
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator system tensor cones: membership, certificates, experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    double tol = 1e-9, eps = 1e-6;
    std::uint64_t seed = 42;
    std::size_t max_iter = 50000;
    bool pretty = false;
    app.add_option("--tol", tol, "positivity tolerance (relative)");
    app.add_option("--eps", eps, "Archimedean shift for max-cone certificates");
    app.add_option("--seed", seed, "seed for randomized searches");
    app.add_option("--max-iter", max_iter, "iteration budget for feasibility solves");
    app.add_flag("--json", pretty, "pretty-print the machine output");

    Emit emit;
    std::string input, element_path, dual_rep_path, strategy_name = "auto";
    std::size_t level = 1, kpos = 1, trials = 200, samples = 500, max_level = 4;
    std::string left_sys = "path3", right_sys = "M2";

    // --- system ---------------------------------------------------------
    auto* sys = app.add_subcommand("system", "operator system commands");
    sys->require_subcommand(1);
    sys->fallthrough();

    auto* sys_validate = sys->add_subcommand("validate", "check the system invariants");
    sys_validate->add_option("--input", input, "system JSON (file or -)")->required();
    sys_validate->callback([&] {
        const auto s = system_from_json(load_json(input));
        json j{{"valid", true}, {"name", s->name()}, {"ambient", s->ambient()}, {"dim", s->dim()}};
        emit(j, "valid operator system: dim " + std::to_string(s->dim()) + " in M_" +
                    std::to_string(s->ambient()),
             0);
    });

    auto* sys_positive = sys->add_subcommand("positive", "positivity of an element of M_n(S)");
    sys_positive->add_option("--input", input, "system JSON")->required();
    sys_positive->add_option("--element", element_path, "matrix JSON for the representation")
        ->required();
    sys_positive->add_option("--level", level, "matrix level n");
    sys_positive->callback([&] {
        const auto s = system_from_json(load_json(input));
        const SystemElement el(s, level, matrix_from_json(load_json(element_path)));
        const auto v = level_positive(el, tol);
        emit(verdict_json(v), v.positive ? "positive" : "not positive", v.positive ? 0 : 1);
    });

    auto* sys_norm = sys->add_subcommand("norm", "norm from the order unit");
    sys_norm->add_option("--input", input, "system JSON")->required();
    sys_norm->add_option("--element", element_path, "matrix JSON")->required();
    sys_norm->add_option("--level", level, "matrix level n");
    sys_norm->callback([&] {
        const auto s = system_from_json(load_json(input));
        const SystemElement el(s, level, matrix_from_json(load_json(element_path)));
        const double nn = norm_via_unit(el);
        emit(json{{"norm", nn}, {"tol", 1e-10}, {"op", "norm_via_unit"}},
             "norm " + std::to_string(nn), 0);
    });

    // --- map --------------------------------------------------------------
    auto* map = app.add_subcommand("map", "completely positive map commands");
    map->require_subcommand(1);
    map->fallthrough();

    auto* map_ext = map->add_subcommand("cp-extension", "search for a CP extension Choi matrix");
    map_ext->add_option("--input", input, "map JSON {domain, codomain, images}")->required();
    map_ext->callback([&] {
        const auto phi = map_from_json(load_json(input));
        const auto out = cp_extension(phi, tol, max_iter);
        json j{{"status", out.status == CpStatus::cp ? "cp" : "undecided"},
               {"constraint_violation", out.constraint_violation},
               {"psd_shortfall", out.psd_shortfall},
               {"iterations", out.iterations}};
        if (out.status == CpStatus::cp) j["extension_choi"] = matrix_to_json(out.extension_choi.matrix());
        emit(j, out.status == CpStatus::cp ? "cp (extension found)" : "undecided",
             out.status == CpStatus::cp ? 0 : 1);
    });

    auto* map_kpos = map->add_subcommand("k-positive", "randomized k-positivity violation search");
    map_kpos->add_option("--input", input, "map JSON")->required();
    map_kpos->add_option("--k", kpos, "positivity level k")->required();
    map_kpos->add_option("--trials", trials, "search restarts");
    map_kpos->callback([&] {
        const auto phi = map_from_json(load_json(input));
        const auto out = k_positivity_probe(phi, kpos, trials, seed, tol);
        json j{{"violation_found", out.violation_found}};
        if (out.violation_found) {
            j["witness"] = matrix_to_json(out.witness->rep());
            j["witness_value"] = out.witness_value;
        }
        emit(j,
             out.violation_found ? "violation found (not k-positive)" : "no violation found",
             out.violation_found ? 1 : 0);
    });

    auto* map_choi = map->add_subcommand("choi", "Choi matrix of a full-algebra map");
    map_choi->add_option("--input", input, "map JSON")->required();
    map_choi->callback([&] {
        const auto phi = map_from_json(load_json(input));
        const auto w = choi_matrix(phi);
        const auto v = is_psd(w, tol);
        json j{{"choi", matrix_to_json(w.matrix())}, {"psd", v.positive}, {"lambda_min", v.lambda_min}};
        emit(j, v.positive ? "choi PSD: map is completely positive" : "choi not PSD",
             v.positive ? 0 : 1);
    });

    // --- dual ---------------------------------------------------------------
    auto* dual = app.add_subcommand("dual", "dual system commands");
    dual->require_subcommand(1);
    dual->fallthrough();

    auto* dual_check = dual->add_subcommand("check", "positivity in M_n(S^d)");
    dual_check->add_option("--input", input, "dual element JSON {system, level, blocks}")
        ->required();
    dual_check->callback([&] {
        const auto f = dual_from_json(load_json(input));
        const auto v = dual_matrix_positive(f, tol, seed);
        emit(json{{"verdict", v.positive ? "positive" : "not_positive"}},
             v.positive ? "positive in the dual matrix order" : "not positive",
             v.positive ? 0 : 1);
    });

    auto* dual_gamma = dual->add_subcommand("gamma", "block-diagonal embedding of the path-3 dual");
    dual_gamma->add_option("--input", input, "dual element JSON")->required();
    dual_gamma->callback([&] {
        const auto f = dual_from_json(load_json(input));
        const auto el = gamma_embed(f);
        const auto v = level_positive(el, tol);
        json j{{"rep", matrix_to_json(el.rep())}, {"verdict", v.positive ? "positive" : "not_positive"}};
        emit(j, v.positive ? "gamma image positive" : "gamma image not positive",
             v.positive ? 0 : 1);
    });

    // --- chordal -------------------------------------------------------------
    auto* chordal = app.add_subcommand("chordal", "chordal graph machinery");
    chordal->require_subcommand(1);
    chordal->fallthrough();

    auto* chordal_check = chordal->add_subcommand("check", "chordality with certificates");
    chordal_check->add_option("--input", input, "graph JSON {vertices, edges}")->required();
    chordal_check->callback([&] {
        const auto g = graph_from_json(load_json(input));
        const auto v = is_chordal(g);
        json j{{"chordal", v.chordal}};
        if (v.chordal) {
            json ord = json::array();
            for (auto x : v.ordering.ordering) ord.push_back(x + 1);
            j["elimination_ordering"] = std::move(ord);
        } else {
            json cyc = json::array();
            for (auto x : v.chordless_cycle) cyc.push_back(x + 1);
            j["chordless_cycle"] = std::move(cyc);
        }
        emit(j, v.chordal ? "chordal" : "not chordal", v.chordal ? 0 : 1);
    });

    auto* chordal_dec = chordal->add_subcommand("decompose", "clique-supported decomposition");
    chordal_dec->add_option("--input", input, "JSON {pattern, q, matrix}")->required();
    chordal_dec->callback([&] {
        const auto j = load_json(input);
        const auto g = graph_from_json(j.at("pattern"));
        const auto m = matrix_from_json(j.at("matrix"));
        const auto verdict = is_chordal(g);
        if (!verdict.chordal) throw input_error("pattern not chordal");
        const auto parts = chordal_decompose(HermitianMatrix(m), g, verdict.ordering, eps);
        json out = json::array();
        for (const auto& p : parts) {
            json jp;
            json cl = json::array();
            for (auto v : p.clique) cl.push_back(v + 1);
            jp["clique"] = std::move(cl);
            jp["summand"] = matrix_to_json(p.summand.matrix());
            out.push_back(std::move(jp));
        }
        emit(json{{"eps", eps}, {"summands", std::move(out)}},
             std::to_string(parts.size()) + " clique-supported summands", 0);
    });

    auto* chordal_complete = chordal->add_subcommand("complete", "PSD completion");
    chordal_complete->add_option("--input", input, "partial matrix JSON")->required();
    chordal_complete->callback([&] {
        const auto p = partial_from_json(load_json(input));
        try {
            const auto m = psd_complete(p, tol);
            emit(json{{"completion", matrix_to_json(m.matrix())}}, "completion found", 0);
        } catch (const input_error& e) {
            const std::string what = e.what();
            if (what.rfind("not partially positive", 0) == 0) {
                emit(json{{"verdict", "not_partially_positive"}, {"detail", what}}, what, 1);
                return;
            }
            throw;
        }
    });

    // --- tensor -----------------------------------------------------------
    auto* tensor = app.add_subcommand("tensor", "tensor cone membership");
    tensor->require_subcommand(1);
    tensor->fallthrough();

    auto* t_min = tensor->add_subcommand("min-member", "minimal cone membership");
    t_min->add_option("--input", input, "tensor element JSON")->required();
    t_min->callback([&] {
        const auto u = element_from_json(load_json(input));
        const auto v = min_member(u, tol);
        emit(verdict_json(v), v.positive ? "min-positive" : "not min-positive", v.positive ? 0 : 1);
    });

    auto* t_inner = tensor->add_subcommand("max-inner", "max cone inner certificate");
    t_inner->add_option("--input", input, "tensor element JSON")->required();
    t_inner->add_option("--strategy", strategy_name, "auto|chordal|matrix|heuristic");
    t_inner->add_option("--max-level", max_level, "factorization level cap for the heuristic");
    t_inner->callback([&] {
        const auto u = element_from_json(load_json(input));
        InnerStrategy st = InnerStrategy::automatic;
        if (strategy_name == "chordal") st = InnerStrategy::chordal;
        else if (strategy_name == "matrix") st = InnerStrategy::matrix;
        else if (strategy_name == "heuristic") st = InnerStrategy::heuristic;
        else if (strategy_name != "auto") throw input_error("unknown strategy: " + strategy_name);
        const auto out = max_member_inner(u, eps, st, max_level, 2000, seed);
        json j{{"certified", out.certified}, {"strategy", out.strategy_used}, {"eps", eps}};
        if (out.certified) {
            j["certificate"] = certificate_to_json(out.certificate);
            const auto chk = validate_certificate(out.certificate, u);
            j["reconstruction_error"] = chk.reconstruction_error;
        } else {
            j["diagnostics"] = out.diagnostics;
        }
        emit(j, out.certified ? "certified at eps (strategy " + out.strategy_used + ")"
                              : "unknown: " + out.diagnostics,
             out.certified ? 0 : 1);
    });

    auto* t_outer = tensor->add_subcommand("max-outer", "separating functional search");
    t_outer->add_option("--input", input, "tensor element JSON")->required();
    t_outer->add_option("--level", level, "factor level budget for joint positivity");
    t_outer->add_option("--dual-rep", dual_rep_path, "dual representation: 'path3' or a JSON file");
    t_outer->callback([&] {
        const auto u = element_from_json(load_json(input));
        std::optional<DualRepresentation> rep;
        if (!dual_rep_path.empty()) {
            if (dual_rep_path == "path3") {
                rep = path3_gamma_representation();
            } else {
                const auto j = load_json(dual_rep_path);
                DualRepresentation dr;
                dr.ambient = j.at("ambient").get<std::size_t>();
                for (const auto& m : j.at("images")) dr.functional_images.push_back(matrix_from_json(m));
                rep = std::move(dr);
            }
        }
        const auto out = max_member_outer(u, level, rep, tol, max_iter, seed);
        json j{{"separated", out.separated},
               {"best_value", out.best_value},
               {"diagnostics", out.diagnostics}};
        if (out.functional) {
            j["w"] = matrix_to_json(out.functional->w.matrix());
            j["value"] = out.functional->value;
            json vals = json::array();
            for (const auto& v : out.functional->validation)
                vals.push_back({{"level", v.level}, {"method", v.method}, {"passed", v.passed}});
            j["validation"] = std::move(vals);
        }
        emit(j, out.separated ? "separating functional found" : "none found", out.separated ? 0 : 1);
    });

    auto* t_fuzz = tensor->add_subcommand("fuzz", "generator-cone vs minimal-cone fuzz harness");
    t_fuzz->add_option("--samples", samples, "number of samples");
    t_fuzz->add_option("--left", left_sys, "left system: path3|Mk|Dk or a JSON file");
    t_fuzz->add_option("--right", right_sys, "right system");
    t_fuzz->callback([&] {
        auto load_sys = [&](const std::string& s) {
            try {
                return system_from_json(json(s));
            } catch (const input_error&) {
                return system_from_json(load_json(s));
            }
        };
        const auto report = order_relation_check(load_sys(left_sys), load_sys(right_sys), samples, seed);
        json j{{"samples", report.samples},
               {"failures", report.failures},
               {"note", report.note}};
        if (report.failures > 0) j["first_failing_seed"] = report.first_failing_seed;
        emit(j, report.note, report.failures == 0 ? 0 : 3);
    });

    // --- paper-suite -------------------------------------------------------
    auto* suite = app.add_subcommand("paper-suite", "run the full reproduction batteries");
    suite->callback([&] {
        const auto out = run_paper_suite(seed, tol, eps, max_iter);
        std::cout << (pretty ? out.report.dump(2) : out.report.dump()) << "\n";
        for (std::size_t i = 0; i < out.report["batteries"].size(); ++i) {
            const auto& b = out.report["batteries"][i];
            std::cerr << "battery " << b["id"] << " (" << b["name"].get<std::string>() << "): "
                      << (b["passed"].get<bool>() ? "pass" : "FAIL");
            if (i < out.battery_ms.size()) std::cerr << "  [" << out.battery_ms[i] << " ms]";
            std::cerr << "\n";
        }
        std::cerr << (out.all_passed ? "paper suite: all batteries passed"
                                     : "paper suite: FAILURES present")
                  << "\n";
        emit.code = out.all_passed ? 0 : 3;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const internal_error& e) {
        std::cerr << "internal validation failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal validation failure: " << e.what() << "\n";
        return 3;
    }
    return emit.code;
}
