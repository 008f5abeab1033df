#include "lpr/pose_metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>
#include <utility>

#include "lpr/error.hpp"

namespace lpr {

Pose2D shift_to_pose(const Pose2D& ref_pose, double x_shift, double y_shift,
                     double theta_match_deg) {
    const double rad = ref_pose.yaw_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    return make_pose(ref_pose.x + c * x_shift - s * y_shift,
                     ref_pose.y + s * x_shift + c * y_shift,
                     ref_pose.yaw_deg + theta_match_deg);
}

double rte(const Pose2D& est, const Pose2D& gt) { return std::hypot(gt.x - est.x, gt.y - est.y); }

double rre(const Pose2D& est, const Pose2D& gt) {
    return std::abs(normalize_deg(gt.yaw_deg - est.yaw_deg));
}

EvalRecord make_eval_record(std::string query_id, PoseEstimate estimate, const Pose2D& ground_truth,
                            double recall_threshold_m) {
    EvalRecord rec;
    rec.query_id = std::move(query_id);
    rec.estimate = std::move(estimate);
    rec.ground_truth = ground_truth;
    rec.rte = rte(rec.estimate.pose, ground_truth);
    rec.rre = rre(rec.estimate.pose, ground_truth);
    rec.within_threshold = rec.rte <= recall_threshold_m;
    return rec;
}

double recall_at_1(const std::vector<EvalRecord>& records, double threshold_m) {
    if (records.empty()) throw DataError("recall@1 over an empty record set");
    int tp = 0;
    for (const EvalRecord& r : records) {
        if (r.rte <= threshold_m) ++tp;
    }
    return static_cast<double>(tp) / static_cast<double>(records.size());
}

SuccessRate success_rate(const std::vector<EvalRecord>& positives, double rte_max_m,
                         double rre_max_deg) {
    if (positives.empty()) return SuccessRate{0.0, true};
    int ok = 0;
    for (const EvalRecord& r : positives) {
        if (r.rte < rte_max_m && r.rre < rre_max_deg) ++ok;
    }
    return SuccessRate{static_cast<double>(ok) / static_cast<double>(positives.size()), false};
}

namespace {

// Population (divide-by-n) statistics.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

EvalReport aggregate(const std::vector<EvalRecord>& records, double threshold_m,
                     double sr_rte_max_m, double sr_rre_max_deg) {
    EvalReport rep;
    rep.n_queries = static_cast<int>(records.size());
    rep.recall_at_1 = recall_at_1(records, threshold_m);

    std::vector<EvalRecord> positives;
    std::vector<double> rtes, rres;
    for (const EvalRecord& r : records) {
        if (r.rte <= threshold_m) {
            positives.push_back(r);
            rtes.push_back(r.rte);
            rres.push_back(r.rre);
        }
    }
    rep.n_true_positive = static_cast<int>(positives.size());
    rep.n_false_positive = rep.n_queries - rep.n_true_positive;
    if (!positives.empty()) {
        std::tie(rep.rte_mean, rep.rte_std) = mean_std(rtes);
        std::tie(rep.rre_mean, rep.rre_std) = mean_std(rres);
    }
    const SuccessRate sr = success_rate(positives, sr_rte_max_m, sr_rre_max_deg);
    rep.success_rate = sr.value;
    rep.success_rate_undefined = sr.undefined;
    return rep;
}

void write_report_csv(const std::vector<EvalRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write report file: " + path);
    out << "query_id,ref_id,x_est,y_est,yaw_est,x_gt,y_gt,yaw_gt,rte,rre,within,score\n";
    for (const EvalRecord& r : records) {
        out << r.query_id << ',' << r.estimate.ref_id << ',' << fmt(r.estimate.pose.x) << ','
            << fmt(r.estimate.pose.y) << ',' << fmt(r.estimate.pose.yaw_deg) << ','
            << fmt(r.ground_truth.x) << ',' << fmt(r.ground_truth.y) << ','
            << fmt(r.ground_truth.yaw_deg) << ',' << fmt(r.rte) << ',' << fmt(r.rre) << ','
            << (r.within_threshold ? 1 : 0) << ',' << fmt(r.estimate.score) << '\n';
    }
    if (!out) throw DataError("short write to report file: " + path);
}

std::string format_summary(const EvalReport& rep, double threshold_m, double sr_rte_max_m,
                           double sr_rre_max_deg) {
    std::ostringstream os;
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("-"); };
    os << "queries: " << rep.n_queries << "\n";
    os << "recall@1: " << fmt(rep.recall_at_1) << " (tp=" << rep.n_true_positive
       << ", fp=" << rep.n_false_positive << ", threshold=" << fmt(threshold_m) << " m)\n";
    os << "rte: mean=" << opt(rep.rte_mean) << " m, std=" << opt(rep.rte_std) << " m\n";
    os << "rre: mean=" << opt(rep.rre_mean) << " deg, std=" << opt(rep.rre_std) << " deg\n";
    os << "success_rate: "
       << (rep.success_rate_undefined ? std::string("- (no positives)") : fmt(rep.success_rate))
       << " (rte<" << fmt(sr_rte_max_m) << " m, rre<" << fmt(sr_rre_max_deg) << " deg)\n";
    return os.str();
}

}  // namespace lpr
