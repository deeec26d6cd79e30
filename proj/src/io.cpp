#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "portfolio/bench.hpp"

namespace portfolio::bench {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw std::invalid_argument("json: malformed input");
    if (!j.is_object()) throw std::invalid_argument("json: expected a top-level object");
    return j;
}

json require_portfolio(const std::string& text, const char* kind) {
    json j = parse(text);
    if (!j.contains("kind") || j.at("kind") != kind)
        throw std::invalid_argument(std::string("portfolio json: expected kind \"") + kind + '"');
    if (!j.contains("items") || !j.at("items").is_array())
        throw std::invalid_argument("portfolio json: missing items array");
    return j;
}

} // namespace

std::string to_json(const matching::Instance& inst) {
    json j;
    j["n"] = inst.n;
    j["cost"] = inst.cost;
    return j.dump();
}

matching::Instance matching_from_json(const std::string& text) {
    json j = parse(text);
    matching::Instance inst;
    inst.n = j.at("n").get<int>();
    inst.cost = j.at("cost").get<std::vector<std::vector<long long>>>();
    matching::validate(inst);
    return inst;
}

std::string to_json(const loadbal::Instance& inst) {
    json j;
    j["m"] = inst.machines;
    json jobs = json::array();
    for (const auto& job : inst.jobs) {
        json o;
        if (job.p_by_machine.empty())
            o["p"] = job.p;
        else
            o["p_by_machine"] = job.p_by_machine;
        o["nbhd"] = job.nbhd;
        jobs.push_back(std::move(o));
    }
    j["jobs"] = std::move(jobs);
    return j.dump();
}

loadbal::Instance loadbal_from_json(const std::string& text) {
    json j = parse(text);
    loadbal::Instance inst;
    inst.machines = j.at("m").get<int>();
    for (const auto& o : j.at("jobs")) {
        loadbal::Job job;
        if (o.contains("p_by_machine"))
            job.p_by_machine = o.at("p_by_machine").get<std::vector<double>>();
        else
            job.p = o.at("p").get<double>();
        job.nbhd = o.at("nbhd").get<std::vector<int>>();
        inst.jobs.push_back(std::move(job));
    }
    loadbal::validate(inst);
    return inst;
}

std::string sizes_to_json(const std::vector<double>& sizes) {
    json j;
    j["sizes"] = sizes;
    return j.dump();
}

std::vector<double> sizes_from_json(const std::string& text) {
    json j = parse(text);
    return j.at("sizes").get<std::vector<double>>();
}

std::string portfolio_to_json(const std::vector<matching::DualVector>& duals) {
    json items = json::array();
    for (const auto& y : duals) {
        json o;
        json left = json::array(), right = json::array();
        for (const auto& v : y.left) left.push_back(v.get_d());
        for (const auto& v : y.right) right.push_back(v.get_d());
        o["left"] = std::move(left);
        o["right"] = std::move(right);
        items.push_back(std::move(o));
    }
    json j;
    j["kind"] = "duals";
    j["items"] = std::move(items);
    return j.dump();
}

std::vector<matching::DualVector> duals_from_json(const std::string& text) {
    json j = require_portfolio(text, "duals");
    std::vector<matching::DualVector> out;
    for (const auto& o : j.at("items")) {
        matching::DualVector y;
        for (const auto& v : o.at("left")) y.left.emplace_back(v.get<double>());
        for (const auto& v : o.at("right")) y.right.emplace_back(v.get<double>());
        out.push_back(std::move(y));
    }
    return out;
}

std::string portfolio_to_json(const std::vector<loadbal::WeightVector>& weights) {
    json j;
    j["kind"] = "weights";
    j["items"] = weights;
    return j.dump();
}

std::vector<loadbal::WeightVector> weights_from_json(const std::string& text) {
    json j = require_portfolio(text, "weights");
    return j.at("items").get<std::vector<loadbal::WeightVector>>();
}

std::string portfolio_to_json(const std::vector<sched::Permutation>& perms) {
    json j;
    j["kind"] = "perms";
    j["items"] = perms;
    return j.dump();
}

std::vector<sched::Permutation> perms_from_json(const std::string& text) {
    json j = require_portfolio(text, "perms");
    return j.at("items").get<std::vector<sched::Permutation>>();
}

namespace {

const char* action_name(sched::RoundAction a) {
    switch (a) {
        case sched::RoundAction::FollowSequence: return "follow";
        case sched::RoundAction::ProcessAll: return "process_all";
        case sched::RoundAction::FinalRoundRobin: return "round_robin";
    }
    return "unknown";
}

} // namespace

std::string matching_stats_csv(const std::vector<MatchingStatsRow>& rows) {
    std::ostringstream out;
    out << "instance_id,k,chosen_index,iterations,total_cost\n";
    for (const auto& r : rows)
        out << r.instance_id << ',' << r.k << ',' << r.chosen_index << ',' << r.iterations << ','
            << r.total_cost << '\n';
    return out.str();
}

std::string loadbal_run_csv(const std::vector<LoadbalRunRow>& rows) {
    std::ostringstream out;
    out << "instance_id,k,beta,doublings,makespan,bound_2Hk_beta\n";
    for (const auto& r : rows)
        out << r.instance_id << ',' << r.k << ',' << r.beta << ',' << r.doublings << ','
            << r.makespan << ',' << r.bound_2hk_beta << '\n';
    return out.str();
}

std::string sched_result_csv(const std::vector<SchedResultRow>& rows) {
    std::ostringstream out;
    out << "instance_id,k,eps,mode,total,opt,rr_total,ratio\n";
    for (const auto& r : rows)
        out << r.instance_id << ',' << r.k << ',' << r.eps << ',' << r.mode << ',' << r.total
            << ',' << r.opt << ',' << r.rr_total << ',' << r.ratio << '\n';
    return out.str();
}

std::string sched_trace_csv(const std::vector<sched::RoundTrace>& rounds) {
    std::ostringstream out;
    out << "round,n_r,q_tilde,y_tilde,action,T_r,completed\n";
    for (const auto& tr : rounds)
        out << tr.round << ',' << tr.alive_count << ',' << tr.threshold_size << ','
            << tr.estimated_rank << ',' << action_name(tr.action) << ',' << tr.duration << ','
            << tr.completed.size() << '\n';
    return out.str();
}

std::string training_report_csv(const std::vector<cluster::KMedianResult>& fits) {
    std::ostringstream out;
    out << "k,objective,iterations,cluster_sizes\n";
    for (const auto& fit : fits) {
        std::vector<std::size_t> sizes(fit.centers.size(), 0);
        for (std::size_t slot : fit.assignment) ++sizes[slot];
        out << fit.centers.size() << ',' << fit.objective << ',' << fit.iterations << ',';
        for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? ";" : "") << sizes[i];
        out << '\n';
    }
    return out.str();
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "problem,cluster,k,tested,mean_iterations,mean_wall_ms,mean_makespan_ratio,"
           "mean_completion_ratio,train_objective,chosen_hist\n";
    for (const auto& r : report.rows) {
        out << report.problem << ',' << r.cluster << ',' << r.k << ',' << r.tested << ','
            << r.mean_iterations << ',' << r.mean_wall_ms << ',' << r.mean_makespan_ratio << ','
            << r.mean_completion_ratio << ',' << r.train_objective << ',';
        for (std::size_t i = 0; i < r.chosen_hist.size(); ++i)
            out << (i ? ";" : "") << r.chosen_hist[i];
        out << '\n';
    }
    return out.str();
}

} // namespace portfolio::bench
