// Command-line front end: generate instance mixtures, train prediction
// portfolios, run the online solvers against a portfolio, and produce
// end-to-end comparison reports.
//
// Layout under --out DIR:
//   gen    DIR/train/instance_###.json, DIR/test/instance_###.json,
//          DIR/manifest.json
//   train  DIR/portfolio_k#.json for every k up to --k, DIR/training_report.csv
//   run    DIR/run_<problem>_k#.csv (+ DIR/traces_k#/instance_###.csv for sched)
//   report DIR/report_<problem>.csv

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "portfolio/bench.hpp"
#include "portfolio/random.hpp"

namespace fs = std::filesystem;
using namespace portfolio;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::vector<fs::path> sorted_json(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw std::runtime_error("missing directory " + dir.string());
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .json instances in " + dir.string());
    return files;
}

std::string instance_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "instance_%03d.json", i);
    return buf;
}

struct Options {
    std::string problem = "matching";
    int k = 3;
    double eps = 0.2;
    std::string mode = "improved";
    std::uint64_t seed = 0;
    std::string out = "out";
};

sched::Config sched_config(const Options& opt) {
    sched::Config cfg;
    cfg.eps = opt.eps;
    cfg.mode = opt.mode == "basic" ? sched::Mode::Basic : sched::Mode::Improved;
    cfg.seed = opt.seed;
    return cfg;
}

// ---- gen --------------------------------------------------------------------

void cmd_gen(const Options& opt) {
    const fs::path dir(opt.out);
    std::vector<int> train_cluster, test_cluster;

    if (opt.problem == "matching") {
        bench::MatchingMixtureSpec spec;
        spec.seed = opt.seed;
        auto mix = bench::gen_matching_mixture(spec);
        for (std::size_t i = 0; i < mix.train.size(); ++i)
            write_file(dir / "train" / instance_name(static_cast<int>(i)),
                       bench::to_json(mix.train[i]));
        for (std::size_t i = 0; i < mix.test.size(); ++i)
            write_file(dir / "test" / instance_name(static_cast<int>(i)),
                       bench::to_json(mix.test[i]));
        train_cluster = mix.train_cluster;
        test_cluster = mix.test_cluster;
    } else if (opt.problem == "loadbal") {
        bench::LoadbalMixtureSpec spec;
        spec.seed = opt.seed;
        auto mix = bench::gen_loadbal_mixture(spec);
        for (std::size_t i = 0; i < mix.train.size(); ++i)
            write_file(dir / "train" / instance_name(static_cast<int>(i)),
                       bench::to_json(mix.train[i]));
        for (std::size_t i = 0; i < mix.test.size(); ++i)
            write_file(dir / "test" / instance_name(static_cast<int>(i)),
                       bench::to_json(mix.test[i]));
        train_cluster = mix.train_cluster;
        test_cluster = mix.test_cluster;
    } else {
        bench::SchedMixtureSpec spec;
        spec.seed = opt.seed;
        auto mix = bench::gen_sched_mixture(spec);
        for (std::size_t i = 0; i < mix.train.size(); ++i)
            write_file(dir / "train" / instance_name(static_cast<int>(i)),
                       bench::sizes_to_json(mix.train[i]));
        for (std::size_t i = 0; i < mix.test.size(); ++i)
            write_file(dir / "test" / instance_name(static_cast<int>(i)),
                       bench::sizes_to_json(mix.test[i]));
        train_cluster = mix.train_cluster;
        test_cluster = mix.test_cluster;
    }

    std::ostringstream manifest;
    manifest << "{\"problem\":\"" << opt.problem << "\",\"seed\":" << opt.seed
             << ",\"train_cluster\":[";
    for (std::size_t i = 0; i < train_cluster.size(); ++i)
        manifest << (i ? "," : "") << train_cluster[i];
    manifest << "],\"test_cluster\":[";
    for (std::size_t i = 0; i < test_cluster.size(); ++i)
        manifest << (i ? "," : "") << test_cluster[i];
    manifest << "]}";
    write_file(dir / "manifest.json", manifest.str());
    std::cout << "wrote " << train_cluster.size() << " train / " << test_cluster.size()
              << " test instances under " << dir << "\n";
}

// ---- train ------------------------------------------------------------------

void cmd_train(const Options& opt) {
    const fs::path dir(opt.out);
    const auto files = sorted_json(dir / "train");
    std::vector<cluster::KMedianResult> fits;

    if (opt.problem == "matching") {
        std::vector<matching::Instance> samples;
        for (const auto& f : files) samples.push_back(bench::matching_from_json(read_file(f)));
        auto path = cluster::erm_duals_path(samples, opt.k);
        for (std::size_t i = 0; i < path.size(); ++i) {
            write_file(dir / ("portfolio_k" + std::to_string(i + 1) + ".json"),
                       bench::portfolio_to_json(path[i].centers));
            fits.push_back(path[i].fit);
        }
    } else if (opt.problem == "loadbal") {
        std::vector<loadbal::Instance> samples;
        for (const auto& f : files) samples.push_back(bench::loadbal_from_json(read_file(f)));
        auto path = cluster::erm_weights_path(samples, opt.k, opt.eps);
        for (std::size_t i = 0; i < path.size(); ++i) {
            write_file(dir / ("portfolio_k" + std::to_string(i + 1) + ".json"),
                       bench::portfolio_to_json(path[i].centers));
            fits.push_back(path[i].fit);
        }
        const auto& failed = path.back().failed;
        if (!failed.empty()) {
            std::cerr << "warning: " << failed.size()
                      << " training sample(s) missed the weight-fit bound and were dropped:";
            for (std::size_t s : failed) std::cerr << " " << s;
            std::cerr << "\n";
        }
    } else {
        std::vector<std::vector<double>> samples;
        for (const auto& f : files) samples.push_back(bench::sizes_from_json(read_file(f)));
        auto path = cluster::erm_permutations_path(samples, opt.k);
        for (std::size_t i = 0; i < path.size(); ++i) {
            write_file(dir / ("portfolio_k" + std::to_string(i + 1) + ".json"),
                       bench::portfolio_to_json(path[i].centers));
            fits.push_back(path[i].fit);
        }
    }

    write_file(dir / "training_report.csv", bench::training_report_csv(fits));
    std::cout << "trained portfolios k=1.." << fits.size() << " from " << files.size()
              << " samples; report at " << (dir / "training_report.csv") << "\n";
}

// ---- run --------------------------------------------------------------------

void cmd_run(const Options& opt) {
    const fs::path dir(opt.out);
    const auto files = sorted_json(dir / "test");
    const fs::path pf = dir / ("portfolio_k" + std::to_string(opt.k) + ".json");
    const std::string portfolio_text = read_file(pf);
    const std::string run_name = "run_" + opt.problem + "_k" + std::to_string(opt.k) + ".csv";

    if (opt.problem == "matching") {
        auto duals = bench::duals_from_json(portfolio_text);
        std::vector<bench::MatchingStatsRow> rows;
        for (std::size_t i = 0; i < files.size(); ++i) {
            auto inst = bench::matching_from_json(read_file(files[i]));
            auto res = matching::solve_with_portfolio(inst, duals);
            bench::MatchingStatsRow row;
            row.instance_id = static_cast<int>(i);
            row.k = static_cast<int>(duals.size());
            row.chosen_index = res.stats.chosen_index;
            row.iterations = res.stats.iterations;
            row.total_cost = res.matching.total_cost;
            rows.push_back(row);
        }
        write_file(dir / run_name, bench::matching_stats_csv(rows));
    } else if (opt.problem == "loadbal") {
        auto weights = bench::weights_from_json(portfolio_text);
        double hk = 0.0;
        for (std::size_t i = 1; i <= weights.size(); ++i) hk += 1.0 / static_cast<double>(i);
        std::vector<bench::LoadbalRunRow> rows;
        for (std::size_t i = 0; i < files.size(); ++i) {
            auto inst = bench::loadbal_from_json(read_file(files[i]));
            std::vector<loadbal::FractionalAssignment> streams;
            for (const auto& w : weights)
                streams.push_back(loadbal::proportional_assignment(inst, w));
            auto out = loadbal::combine_with_doubling(inst, streams);
            bench::LoadbalRunRow row;
            row.instance_id = static_cast<int>(i);
            row.k = static_cast<int>(weights.size());
            row.beta = out.beta_final;
            row.doublings = out.doublings;
            row.makespan = out.makespan;
            row.bound_2hk_beta = 2.0 * hk * out.beta_final;
            rows.push_back(row);
        }
        write_file(dir / run_name, bench::loadbal_run_csv(rows));
    } else {
        auto perms = bench::perms_from_json(portfolio_text);
        const sched::Config base_cfg = sched_config(opt);
        sched::validate_config(base_cfg);
        std::vector<bench::SchedResultRow> rows;
        for (std::size_t i = 0; i < files.size(); ++i) {
            auto sizes = bench::sizes_from_json(read_file(files[i]));
            sched::Config cfg = base_cfg;
            cfg.seed = mix_seed(base_cfg.seed, 71, i);
            auto run = sched::schedule_with_predictions(sizes, perms, cfg);
            bench::SchedResultRow row;
            row.instance_id = static_cast<int>(i);
            row.k = static_cast<int>(perms.size());
            row.eps = opt.eps;
            row.mode = opt.mode;
            row.total = run.schedule.total;
            row.opt = sched::sjf_opt(sizes);
            row.rr_total = sched::round_robin(sizes).total;
            row.ratio = row.total / row.opt;
            rows.push_back(row);
            write_file(dir / ("traces_k" + std::to_string(opt.k)) /
                           ("instance_" + std::to_string(i) + ".csv"),
                       bench::sched_trace_csv(run.rounds));
        }
        write_file(dir / run_name, bench::sched_result_csv(rows));
    }
    std::cout << "ran " << files.size() << " test instances; results at " << (dir / run_name)
              << "\n";
}

// ---- report -----------------------------------------------------------------

void cmd_report(const Options& opt) {
    bench::ExperimentConfig cfg;
    cfg.k_max = opt.k;
    cfg.eps = opt.eps;
    cfg.sched_cfg = sched_config(opt);

    bench::ExperimentReport report;
    if (opt.problem == "matching") {
        bench::MatchingMixtureSpec spec;
        spec.seed = opt.seed;
        report = bench::run_experiment(spec, cfg);
    } else if (opt.problem == "loadbal") {
        bench::LoadbalMixtureSpec spec;
        spec.seed = opt.seed;
        report = bench::run_experiment(spec, cfg);
    } else {
        bench::SchedMixtureSpec spec;
        spec.seed = opt.seed;
        report = bench::run_experiment(spec, cfg);
    }

    const fs::path out = fs::path(opt.out) / ("report_" + opt.problem + ".csv");
    write_file(out, bench::report_to_csv(report));
    std::cout << "report with " << report.rows.size() << " rows at " << out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prediction-portfolio toolkit: generate, train, run, report"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool needs_eps_mode) {
        sub->add_option("--problem", opt.problem, "matching | loadbal | sched")
            ->check(CLI::IsMember({"matching", "loadbal", "sched"}));
        sub->add_option("--out", opt.out, "working directory for instance and result files");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--k", opt.k, "portfolio size")->check(CLI::PositiveNumber);
        if (needs_eps_mode) {
            sub->add_option("--eps", opt.eps, "accuracy parameter");
            sub->add_option("--mode", opt.mode, "sampling mode: basic | improved")
                ->check(CLI::IsMember({"basic", "improved"}));
        }
    };

    auto* gen = app.add_subcommand("gen", "generate a train/test instance mixture");
    add_common(gen, false);
    auto* train = app.add_subcommand("train", "fit portfolios k=1..K on the train split");
    add_common(train, true);
    auto* run = app.add_subcommand("run", "evaluate a trained portfolio on the test split");
    add_common(run, true);
    auto* report = app.add_subcommand("report", "end-to-end mixture -> training -> evaluation");
    add_common(report, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) cmd_gen(opt);
        if (train->parsed()) cmd_train(opt);
        if (run->parsed()) cmd_run(opt);
        if (report->parsed()) cmd_report(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
