// structsel: selection-rule dictionaries, grouping synthesis, and latent
// overlapping group lasso fits from the command line.
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "structsel/dictionary.hpp"
#include "structsel/fixtures.hpp"
#include "structsel/grouping.hpp"
#include "structsel/harness.hpp"
#include "structsel/io.hpp"
#include "structsel/model.hpp"
#include "structsel/rule_parser.hpp"

namespace ss = structsel;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ss::Error("cannot write " + path);
    out << text;
}

void write_report(const std::string& path, const json& report) {
    write_text(path, report.dump(2) + "\n");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ss::Error("cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ss::Error(path + ": " + e.what());
    }
}

ss::PenaltyKind penalty_from_name(const std::string& name) {
    if (name == "l2") return ss::PenaltyKind::L2;
    if (name == "mcp") return ss::PenaltyKind::MCP;
    if (name == "scad") return ss::PenaltyKind::SCAD;
    throw ss::Error("unknown penalty: " + name + " (expected l2, mcp, or scad)");
}

ss::RiskKind risk_from_name(const std::string& name) {
    if (name == "deviance") return ss::RiskKind::Deviance;
    if (name == "squared_error") return ss::RiskKind::SquaredError;
    if (name == "misclassification") return ss::RiskKind::Misclassification;
    throw ss::Error("unknown risk: " + name);
}

ss::OutcomeKind outcome_from_name(const std::string& name) {
    if (name == "binary") return ss::OutcomeKind::Binary;
    if (name == "continuous") return ss::OutcomeKind::Continuous;
    throw ss::Error("unknown outcome kind: " + name);
}

void write_dictionary_file(const std::string& path, const ss::Dictionary& d,
                           const std::string& format) {
    if (format == "binary") {
        if (path == "-") throw ss::Error("binary dictionaries need a file path");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ss::Error("cannot write " + path);
        ss::write_dictionary_binary(out, d);
        return;
    }
    std::ostringstream ss_;
    ss::write_dictionary_ndjson(ss_, d);
    write_text(path, ss_.str());
}

// First member of the symmetric difference, as a witness for mismatch
// reports.
std::optional<ss::VarSet> first_disagreement(const ss::Dictionary& a, const ss::Dictionary& b) {
    ss::Dictionary ab = ss::dict_difference(a, b);
    ss::Dictionary ba = ss::dict_difference(b, a);
    if (ab.size() == 0 && ba.size() == 0) return std::nullopt;
    if (ab.size() == 0) return ba.at(0);
    if (ba.size() == 0) return ab.at(0);
    return ab.masks()[0] < ba.masks()[0] ? ab.at(0) : ba.at(0);
}

struct DictArgs {
    std::string registry, rules, algo = "both", out = "-", format = "ndjson";
};

int cmd_dict(const DictArgs& a, int threads) {
    ss::RegistryPtr reg = ss::read_registry_file(a.registry);
    ss::RuleSet rs = ss::parse_rule_file(ss::slurp_file(a.rules), reg);

    json report;
    report["algo"] = a.algo;
    report["threads"] = threads;
    std::optional<ss::Dictionary> d1, d2;
    if (a.algo == "setops" || a.algo == "both") {
        auto t0 = std::chrono::steady_clock::now();
        d1 = ss::derive_algorithm1(rs);
        report["seconds_setops"] = seconds_since(t0);
    }
    if (a.algo == "exhaustive" || a.algo == "both") {
        auto t0 = std::chrono::steady_clock::now();
        d2 = ss::derive_algorithm2(rs, {}, threads);
        report["seconds_exhaustive"] = seconds_since(t0);
    }
    const ss::Dictionary& result = d1 ? *d1 : *d2;
    report["cardinality"] = result.size();

    if (d1 && d2) {
        const bool agree = *d1 == *d2;
        report["agree"] = agree;
        if (!agree) {
            auto w = first_disagreement(*d1, *d2);
            report["witness"] = w ? w->to_string() : "?";
            std::cerr << "algorithms disagree; witness: " << report["witness"] << "\n";
            std::cout << report.dump(2) << "\n";
            return 1;
        }
    }
    if (a.out != "-") write_dictionary_file(a.out, result, a.format);
    report["out"] = a.out;
    std::cout << report.dump(2) << "\n";
    return 0;
}

struct GroupsArgs {
    std::string registry, rules, groups, out = "-";
    bool ogl = false;
    bool relax_forced = false;
    bool verify_after_synth = false;
};

ss::Dictionary target_dictionary(const ss::RuleSet& rs, bool relax_forced, int threads) {
    if (relax_forced) return ss::derive_algorithm2(ss::none_or_all_relaxation(rs), {}, threads);
    return ss::derive_algorithm2(rs, {}, threads);
}

int cmd_groups_verify(const GroupsArgs& a, int threads) {
    ss::RegistryPtr reg = ss::read_registry_file(a.registry);
    ss::RuleSet rs = ss::parse_rule_file(ss::slurp_file(a.rules), reg);
    ss::GroupingStructure g = ss::read_grouping_file(a.groups, reg);
    ss::Dictionary target = target_dictionary(rs, a.relax_forced, threads);
    ss::CongruenceResult res = a.ogl ? ss::verify_congruence_ogl(g, target)
                                     : ss::verify_congruence(g, target);
    json report;
    report["congruent"] = res.congruent;
    report["dictionary_cardinality"] = target.size();
    report["groups"] = g.size();
    if (!res.congruent) {
        report["witness"] = res.describe();
        std::cout << report.dump(2) << "\n";
        return 1;
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_groups_synth(const GroupsArgs& a, int threads) {
    ss::RegistryPtr reg = ss::read_registry_file(a.registry);
    ss::RuleSet rs = ss::parse_rule_file(ss::slurp_file(a.rules), reg);
    ss::GroupingStructure g = ss::synthesize_from_rules(rs);
    std::ostringstream out;
    ss::write_grouping(out, g);
    write_text(a.out, out.str());

    json report;
    report["groups"] = g.size();
    report["out"] = a.out;
    if (a.verify_after_synth) {
        ss::Dictionary target = target_dictionary(rs, true, threads);
        ss::CongruenceResult res = ss::verify_congruence(g, target);
        report["congruent"] = res.congruent;
        if (!res.congruent) {
            report["witness"] = res.describe();
            std::cout << report.dump(2) << "\n";
            return 1;
        }
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_groups_induced(const GroupsArgs& a, int) {
    ss::RegistryPtr reg = ss::read_registry_file(a.registry);
    ss::GroupingStructure g = ss::read_grouping_file(a.groups, reg);
    ss::Dictionary d = a.ogl ? ss::ogl_induced_dictionary(g) : ss::induced_dictionary(g);
    write_dictionary_file(a.out, d, "ndjson");
    json report;
    report["cardinality"] = d.size();
    report["out"] = a.out;
    std::cout << report.dump(2) << "\n";
    return 0;
}

struct FitArgs {
    std::string data, groups, config, outcome = "binary", outcome_col;
    std::string out = "-", out_path;
};

ss::FitOptions fit_options_from(const json& cfg) {
    ss::FitOptions f;
    f.tol = cfg.value("tol", f.tol);
    f.max_iter = cfg.value("max_iter", f.max_iter);
    f.standardize = cfg.value("standardize", f.standardize);
    return f;
}

int cmd_fit(const FitArgs& a) {
    const json cfg = a.config.empty() ? json::object() : load_json_file(a.config);
    ss::Design design = ss::read_design_csv_file(a.data, outcome_from_name(a.outcome),
                                                 a.outcome_col);
    ss::GroupingStructure groups = ss::read_grouping_file(a.groups, design.reg);

    const ss::PenaltyKind kind = penalty_from_name(cfg.value("penalty", std::string("l2")));
    const double gamma = cfg.value("gamma", ss::default_gamma(kind));
    const ss::FitOptions opts = fit_options_from(cfg);

    std::vector<ss::FitResult> path;
    if (cfg.contains("lambda")) {
        const ss::PenaltySpec spec{kind, cfg["lambda"].get<double>(), gamma};
        path.push_back(ss::fit_logl(design, groups, spec, opts));
    } else {
        path = ss::fit_path(design, groups, kind, gamma, cfg.value("n_lambda", 50),
                            cfg.value("lambda_min_ratio", 1e-3), opts);
    }

    if (!a.out_path.empty()) {
        std::ostringstream csv;
        csv << "lambda,variable,coefficient\n" << std::setprecision(17);
        for (const auto& r : path)
            for (Eigen::Index j = 0; j < r.beta.size(); ++j)
                csv << r.penalty.lambda << "," << design.reg->name(static_cast<int>(j)) << ","
                    << r.beta[j] << "\n";
        write_text(a.out_path, csv.str());
    }

    json report;
    report["penalty"] = ss::penalty_name(kind);
    report["gamma"] = gamma;
    report["seed"] = cfg.value("seed", 0);
    json points = json::array();
    for (const auto& r : path) {
        json pt;
        pt["lambda"] = r.penalty.lambda;
        pt["objective"] = r.objective;
        pt["iterations"] = r.iterations;
        pt["converged"] = r.converged;
        pt["support"] = r.support.to_names();
        std::vector<std::string> sel;
        for (int gi : r.selected_groups) sel.push_back(groups.names[gi]);
        pt["selected_groups"] = sel;
        points.push_back(std::move(pt));
    }
    report["path"] = std::move(points);
    write_report(a.out, report);
    return 0;
}

struct CvArgs {
    std::string data, groups, config, outcome = "binary", outcome_col;
    std::string out = "-";
};

int cmd_cv(const CvArgs& a) {
    const json cfg = a.config.empty() ? json::object() : load_json_file(a.config);
    ss::Design design = ss::read_design_csv_file(a.data, outcome_from_name(a.outcome),
                                                 a.outcome_col);
    ss::GroupingStructure groups = ss::read_grouping_file(a.groups, design.reg);

    ss::PathConfig path;
    path.kind = penalty_from_name(cfg.value("penalty", std::string("l2")));
    path.gamma = cfg.value("gamma", 0.0);
    path.n_lambda = cfg.value("n_lambda", 50);
    path.lambda_min_ratio = cfg.value("lambda_min_ratio", 1e-3);
    path.fit = fit_options_from(cfg);

    ss::CVConfig cv;
    cv.folds = cfg.value("folds", 10);
    cv.seed = cfg.value("seed", 0);
    cv.stratified = cfg.value("stratified", true);
    if (cfg.contains("risk")) cv.risk = risk_from_name(cfg["risk"].get<std::string>());

    ss::CVResult res = ss::cross_validate(design, groups, path, cv);

    json report;
    report["seed"] = res.seed;
    report["risk"] = ss::risk_name(res.risk);
    report["folds"] = cv.folds;
    report["lambdas"] = res.lambdas;
    report["mean_risk"] = res.mean_risk;
    report["sd_risk"] = res.sd_risk;
    report["selected_index"] = res.selected_index;
    report["selected_lambda"] = res.selected_lambda;
    report["support"] = res.final_fit.support.to_names();
    json coef = json::object();
    for (Eigen::Index j = 0; j < res.final_fit.beta.size(); ++j)
        coef[design.reg->name(static_cast<int>(j))] = res.final_fit.beta[j];
    report["coefficients"] = std::move(coef);
    report["intercept"] = res.final_fit.intercept;
    write_report(a.out, report);
    return 0;
}

struct SimArgs {
    std::string spec, out = "-";
};

int cmd_simulate(const SimArgs& a) {
    const json cfg = load_json_file(a.spec);
    ss::SyntheticSpec spec;
    spec.n = cfg.value("n", spec.n);
    spec.kind = outcome_from_name(cfg.value("outcome", std::string("binary")));
    spec.seed = cfg.value("seed", spec.seed);
    spec.intercept = cfg.value("intercept", spec.intercept);
    spec.sigma = cfg.value("sigma", spec.sigma);
    if (cfg.contains("registry"))
        spec.reg = ss::VarRegistry::create(cfg["registry"].get<std::vector<std::string>>());
    if (cfg.contains("beta"))
        for (const auto& [name, value] : cfg["beta"].items())
            spec.beta[name] = value.get<double>();

    ss::Design d = ss::generate_synthetic(spec);
    std::ostringstream csv;
    ss::write_design_csv(csv, d, "y");
    write_text(a.out, csv.str());

    json report;
    report["seed"] = spec.seed;
    report["n"] = spec.n;
    report["columns"] = d.reg->size();
    report["out"] = a.out;
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_repro_fixtures(int threads) {
    int failures = 0;
    auto check = [&](const std::string& label, bool ok, const std::string& detail = "") {
        std::cout << label << (ok ? " - OK" : " - FAILED") << "\n";
        if (!ok) {
            if (!detail.empty()) std::cout << "  witness: " << detail << "\n";
            ++failures;
        }
    };

    ss::RuleSet rs = ss::fixtures::application_rules();

    auto t0 = std::chrono::steady_clock::now();
    ss::Dictionary d1 = ss::derive_algorithm1(rs);
    const double sec1 = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    ss::Dictionary d2 = ss::derive_algorithm2(rs, {}, threads);
    const double sec2 = seconds_since(t0);

    check("dictionary cardinality: " + std::to_string(d1.size()), d1.size() == 32512);
    {
        const bool agree = d1 == d2;
        std::string witness;
        if (!agree) {
            auto w = first_disagreement(d1, d2);
            witness = w ? w->to_string() : "?";
        }
        check("set-operations and exhaustive routes agree", agree, witness);
    }

    ss::RuleSet relaxed = ss::none_or_all_relaxation(rs);
    ss::Dictionary relaxed_dict = ss::derive_algorithm2(relaxed, {}, threads);
    ss::GroupingStructure g19 = ss::fixtures::application_grouping();
    ss::CongruenceResult cong = ss::verify_congruence(g19, relaxed_dict);
    check("19-group structure congruent to the none-or-all rule set", cong.congruent,
          cong.congruent ? "" : cong.describe());

    ss::GroupingStructure synth = ss::synthesize_from_rules(rs);
    ss::CongruenceResult cong2 = ss::verify_congruence(synth, relaxed_dict);
    check("synthesized structure congruent to the none-or-all rule set", cong2.congruent,
          cong2.congruent ? "" : cong2.describe());

    std::cout << "timings: setops " << sec1 << "s, exhaustive " << sec2 << "s\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selection-rule dictionaries and the latent overlapping group lasso"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads for exhaustive scans")
        ->check(CLI::Range(1, 64));

    DictArgs dict_args;
    CLI::App* dict = app.add_subcommand("dict", "derive a selection dictionary from rules");
    dict->add_option("--registry", dict_args.registry, "registry file")->required();
    dict->add_option("--rules", dict_args.rules, "rule file")->required();
    dict->add_option("--algo", dict_args.algo, "setops, exhaustive, or both")
        ->check(CLI::IsMember({"setops", "exhaustive", "both"}));
    dict->add_option("--out", dict_args.out, "dictionary output path, - for stdout");
    dict->add_option("--format", dict_args.format, "ndjson or binary")
        ->check(CLI::IsMember({"ndjson", "binary"}));

    GroupsArgs groups_args;
    CLI::App* groups = app.add_subcommand("groups", "grouping structures");
    groups->require_subcommand(1);
    CLI::App* gverify = groups->add_subcommand("verify", "check a structure against rules");
    gverify->add_option("--registry", groups_args.registry)->required();
    gverify->add_option("--rules", groups_args.rules)->required();
    gverify->add_option("--groups", groups_args.groups)->required();
    gverify->add_flag("--ogl", groups_args.ogl, "verify the non-latent variant instead");
    gverify->add_flag("--relax-forced", groups_args.relax_forced,
                      "replace a forced block with its none-or-all rule first");
    CLI::App* gsynth = groups->add_subcommand("synth", "synthesize a structure from rules");
    gsynth->add_option("--registry", groups_args.registry)->required();
    gsynth->add_option("--rules", groups_args.rules)->required();
    gsynth->add_option("--out", groups_args.out);
    gsynth->add_flag("--verify", groups_args.verify_after_synth,
                     "also check congruence of the result");
    CLI::App* ginduced = groups->add_subcommand("induced", "induced dictionary of a structure");
    ginduced->add_option("--registry", groups_args.registry)->required();
    ginduced->add_option("--groups", groups_args.groups)->required();
    ginduced->add_option("--out", groups_args.out);
    ginduced->add_flag("--ogl", groups_args.ogl, "complement unions instead");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit a latent overlapping group lasso path");
    fit->add_option("--data", fit_args.data, "design CSV")->required();
    fit->add_option("--groups", fit_args.groups, "grouping JSON")->required();
    fit->add_option("--config", fit_args.config, "fit config JSON");
    fit->add_option("--outcome", fit_args.outcome, "binary or continuous")
        ->check(CLI::IsMember({"binary", "continuous"}));
    fit->add_option("--outcome-col", fit_args.outcome_col, "outcome column (default: last)");
    fit->add_option("--out", fit_args.out, "JSON summary path, - for stdout");
    fit->add_option("--out-path", fit_args.out_path, "coefficient path CSV");

    CvArgs cv_args;
    CLI::App* cv = app.add_subcommand("cv", "cross-validate a path and select lambda");
    cv->add_option("--data", cv_args.data, "design CSV")->required();
    cv->add_option("--groups", cv_args.groups, "grouping JSON")->required();
    cv->add_option("--config", cv_args.config, "cv config JSON");
    cv->add_option("--outcome", cv_args.outcome, "binary or continuous")
        ->check(CLI::IsMember({"binary", "continuous"}));
    cv->add_option("--outcome-col", cv_args.outcome_col, "outcome column (default: last)");
    cv->add_option("--out", cv_args.out, "JSON report path, - for stdout");

    SimArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "generate synthetic data");
    sim->add_option("--spec", sim_args.spec, "spec JSON")->required();
    sim->add_option("--out", sim_args.out, "CSV output path, - for stdout");

    CLI::App* repro = app.add_subcommand("repro", "built-in reproduction checks");
    repro->require_subcommand(1);
    CLI::App* fixture_checks =
        repro->add_subcommand("fixtures", "dictionary and grouping fixture checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (dict->parsed()) return cmd_dict(dict_args, threads);
        if (groups->parsed()) {
            if (gverify->parsed()) return cmd_groups_verify(groups_args, threads);
            if (gsynth->parsed()) return cmd_groups_synth(groups_args, threads);
            if (ginduced->parsed()) return cmd_groups_induced(groups_args, threads);
        }
        if (fit->parsed()) return cmd_fit(fit_args);
        if (cv->parsed()) return cmd_cv(cv_args);
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (repro->parsed() && fixture_checks->parsed()) return cmd_repro_fixtures(threads);
    } catch (const ss::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
