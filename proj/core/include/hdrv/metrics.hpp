#pragma once

#include <string>
#include <vector>

#include "hdrv/image.hpp"
#include "hdrv/radiometry.hpp"

namespace hdrv {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kDefaultPeakNits = 1000.0;

struct QualityScores {
    double psnr_mu = 0.0;
    double ssim_mu = 0.0;
    double pu_psnr = 0.0;
    double pu_ssim = 0.0;
};

struct DiversityScores {
    double fhlp = 0.0;
    double ehl = 0.0;
    double si = 0.0;
    double cf = 0.0;
    double stdl = 0.0;
    double all = 0.0;
    double dr = 0.0;
    bool degenerate = false; // all-zero luminance; dr pinned to 0
};

/// 99.9th-percentile luminance (nearest-rank), the truth-side normalizer
/// shared by every quality metric.
double luminance_percentile(const Image& img, double q = 0.999);

/// PSNR of the mu-law tonemapped pair, both normalized by the truth's
/// 99.9th-percentile luminance and clipped to [0,1]. Capped at 99 dB.
double psnr_mu(const Image& estimate, const Image& truth, double mu = kDefaultMu);

/// Mean SSIM (11x11 Gaussian window, sigma 1.5, C1=0.01^2, C2=0.03^2) of
/// the mu-law tonemapped luminance, same normalization as psnr_mu.
double ssim_mu(const Image& estimate, const Image& truth, double mu = kDefaultMu);

/// PU21 banding-glare encoding of a relative linear image; 1.0 maps to
/// peak_nits. Output offset so 0 -> 0 and rescaled so peak_nits -> 1.
Image pu_encode(const Image& img, double peak_nits = kDefaultPeakNits);

/// Scalar PU21 curve in absolute cd/m^2 (unscaled reference encoding).
double pu21_encode_nits(double nits);

double pu_psnr(const Image& estimate, const Image& truth, double peak_nits = kDefaultPeakNits);
double pu_ssim(const Image& estimate, const Image& truth, double peak_nits = kDefaultPeakNits);

QualityScores quality_scores(const Image& estimate, const Image& truth,
                             double mu = kDefaultMu, double peak_nits = kDefaultPeakNits);

/// Dataset diversity statistics on a single HDR frame.
DiversityScores diversity_metrics(const Image& hdr, double mu = kDefaultMu);

/// Tabular per-frame report with mean/stddev aggregates. Values are rounded
/// to 6 significant decimal digits once, so CSV and JSON consumers see
/// exactly the same numbers.
struct MetricReport {
    std::string mode; // "quality" or "diversity"
    std::vector<std::string> columns;
    std::vector<std::string> frame_ids;
    std::vector<std::vector<double>> rows;
    std::vector<double> mean;
    std::vector<double> stddev;
};

MetricReport dataset_report(const std::vector<QualityScores>& rows,
                            const std::vector<std::string>& frame_ids = {});
MetricReport dataset_report(const std::vector<DiversityScores>& rows,
                            const std::vector<std::string>& frame_ids = {});

void write_report_csv(const MetricReport& report, const std::filesystem::path& path);

/// JSON mirror of the CSV with an aggregates object; extra_object_json,
/// when non-empty, must be a serialized JSON object whose fields are merged
/// into the top level (run config, input hashes).
std::string report_json_string(const MetricReport& report,
                               const std::string& extra_object_json = "");

} // namespace hdrv
