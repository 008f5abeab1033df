#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lpr/geometry.hpp"

namespace lpr {

struct PoseEstimate {
    Pose2D pose;
    std::string ref_id;
    double score = 0.0;
    bool low_confidence = false;
};

struct EvalRecord {
    std::string query_id;
    PoseEstimate estimate;
    Pose2D ground_truth;
    double rte = 0.0;  // meters
    double rre = 0.0;  // degrees, in [0, 180]
    bool within_threshold = false;
};

struct EvalReport {
    double recall_at_1 = 0.0;
    std::optional<double> rte_mean, rte_std;  // over true positives; absent if none
    std::optional<double> rre_mean, rre_std;
    double success_rate = 0.0;
    bool success_rate_undefined = false;  // no positives to score
    int n_queries = 0;
    int n_true_positive = 0;
    int n_false_positive = 0;
};

// Query position from the matched reference pose and the relative shift
// expressed in the reference scan's frame:
//   (xq, yq) = (xr, yr) + R(yaw_r) * (x_shift, y_shift)
//   yaw_q    = normalize(yaw_r + theta_match)
Pose2D shift_to_pose(const Pose2D& ref_pose, double x_shift, double y_shift, double theta_match_deg);

double rte(const Pose2D& est, const Pose2D& gt);
double rre(const Pose2D& est, const Pose2D& gt);

EvalRecord make_eval_record(std::string query_id, PoseEstimate estimate, const Pose2D& ground_truth,
                            double recall_threshold_m);

// Fraction of records whose estimate lies within the revisit threshold.
double recall_at_1(const std::vector<EvalRecord>& records, double threshold_m);

struct SuccessRate {
    double value = 0.0;
    bool undefined = false;  // zero positives
};

// Over true positives only: fraction with rte < rte_max and rre < rre_max
// (strict on both).
SuccessRate success_rate(const std::vector<EvalRecord>& positives, double rte_max_m = 2.0,
                         double rre_max_deg = 5.0);

EvalReport aggregate(const std::vector<EvalRecord>& records, double threshold_m,
                     double sr_rte_max_m = 2.0, double sr_rre_max_deg = 5.0);

// Report CSV, one row per record (caller orders them):
// query_id,ref_id,x_est,y_est,yaw_est,x_gt,y_gt,yaw_gt,rte,rre,within,score
void write_report_csv(const std::vector<EvalRecord>& records, const std::string& path);

std::string format_summary(const EvalReport& report, double threshold_m, double sr_rte_max_m,
                           double sr_rre_max_deg);

}  // namespace lpr
