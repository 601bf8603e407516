#include "hdrv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hdrv {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

Image normalize_clip(const Image& img, double scale) {
    Image out(img.height, img.width, img.channels, Domain::LinearHdr);
    const double inv = 1.0 / scale;
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = static_cast<float>(std::clamp(img.data[i] * inv, 0.0, 1.0));
    return out;
}

double mse(const Image& a, const Image& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr_from_mse(double m) {
    if (m <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

// SSIM core on 1-channel [0,1] images: 11x11 Gaussian window (sigma 1.5),
// evaluated where the window fits entirely.
double ssim_core(const Image& x, const Image& y) {
    constexpr int W = 11, R = 5;
    constexpr double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    if (x.height < W || x.width < W)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    double g[W];
    double gsum = 0.0;
    for (int i = 0; i < W; ++i) {
        const double d = i - R;
        g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        gsum += g[i];
    }
    for (double& v : g) v /= gsum;

    const int h = x.height, w = x.width;
    const int oh = h - W + 1, ow = w - W + 1;
    // horizontal pass over full rows, vertical pass over valid rows
    auto hpass = [&](const std::vector<double>& src, std::vector<double>& dst) {
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < ow; ++xx) {
                double acc = 0.0;
                for (int t = 0; t < W; ++t) acc += g[t] * src[static_cast<size_t>(yy) * w + xx + t];
                dst[static_cast<size_t>(yy) * ow + xx] = acc;
            }
    };
    auto vpass = [&](const std::vector<double>& src, std::vector<double>& dst) {
        for (int yy = 0; yy < oh; ++yy)
            for (int xx = 0; xx < ow; ++xx) {
                double acc = 0.0;
                for (int t = 0; t < W; ++t)
                    acc += g[t] * src[static_cast<size_t>(yy + t) * ow + xx];
                dst[static_cast<size_t>(yy) * ow + xx] = acc;
            }
    };

    const size_t n = static_cast<size_t>(h) * w;
    std::vector<double> xs(n), ys(n), xx2(n), yy2(n), xy(n);
    for (size_t i = 0; i < n; ++i) {
        xs[i] = x.data[i];
        ys[i] = y.data[i];
        xx2[i] = xs[i] * xs[i];
        yy2[i] = ys[i] * ys[i];
        xy[i] = xs[i] * ys[i];
    }
    std::vector<double> t1(static_cast<size_t>(h) * ow), mu_x(static_cast<size_t>(oh) * ow),
        mu_y(mu_x.size()), e_xx(mu_x.size()), e_yy(mu_x.size()), e_xy(mu_x.size());
    hpass(xs, t1);
    vpass(t1, mu_x);
    hpass(ys, t1);
    vpass(t1, mu_y);
    hpass(xx2, t1);
    vpass(t1, e_xx);
    hpass(yy2, t1);
    vpass(t1, e_yy);
    hpass(xy, t1);
    vpass(t1, e_xy);

    double acc = 0.0;
    for (size_t i = 0; i < mu_x.size(); ++i) {
        const double sx = e_xx[i] - mu_x[i] * mu_x[i];
        const double sy = e_yy[i] - mu_y[i] * mu_y[i];
        const double sxy = e_xy[i] - mu_x[i] * mu_y[i];
        acc += ((2.0 * mu_x[i] * mu_y[i] + C1) * (2.0 * sxy + C2)) /
               ((mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + C1) * (sx + sy + C2));
    }
    return acc / static_cast<double>(mu_x.size());
}

void check_pair(const Image& estimate, const Image& truth, const char* op) {
    if (!estimate.same_shape(truth))
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

} // namespace

double luminance_percentile(const Image& img, double q) {
    const Image y = to_luminance(img);
    std::vector<float> v(y.data);
    const size_t n = v.size();
    size_t k = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
    k = std::clamp<size_t>(k, 1, n);
    std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
    return v[k - 1];
}

double psnr_mu(const Image& estimate, const Image& truth, double mu) {
    check_pair(estimate, truth, "psnr_mu");
    const double scale = std::max(1e-12, luminance_percentile(truth));
    const Image te = mu_tonemap(normalize_clip(estimate, scale), mu);
    const Image tt = mu_tonemap(normalize_clip(truth, scale), mu);
    return psnr_from_mse(mse(te, tt));
}

double ssim_mu(const Image& estimate, const Image& truth, double mu) {
    check_pair(estimate, truth, "ssim_mu");
    const double scale = std::max(1e-12, luminance_percentile(truth));
    const Image te = mu_tonemap(to_luminance(normalize_clip(estimate, scale)), mu);
    const Image tt = mu_tonemap(to_luminance(normalize_clip(truth, scale)), mu);
    return ssim_core(te, tt);
}

// PU21 banding-glare coefficients (Mantiuk & Azimi 2021 reference encoding).
namespace pu21 {
constexpr double p1 = 0.353487901;
constexpr double p2 = 0.3734658629;
constexpr double p3 = 8.277049286e-05;
constexpr double p4 = 0.9062562627;
constexpr double p5 = 0.09150303166;
constexpr double p6 = 0.9099517204;
constexpr double p7 = 596.3148142;
} // namespace pu21

double pu21_encode_nits(double nits) {
    using namespace pu21;
    const double yp = std::pow(nits, p4);
    return p7 * (std::pow((p1 + p2 * yp) / (1.0 + p3 * yp), p5) - p6);
}

Image pu_encode(const Image& img, double peak_nits) {
    if (peak_nits <= 0.0)
        throw std::invalid_argument("pu_encode: peak_nits must be positive");
    const double lo = pu21_encode_nits(0.0);
    const double hi = pu21_encode_nits(peak_nits);
    const double inv = 1.0 / (hi - lo);
    Image out(img.height, img.width, img.channels, Domain::LinearHdr);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = img.data[i];
        if (v < 0.0)
            throw std::domain_error("pu_encode: negative luminance");
        out.data[i] = static_cast<float>((pu21_encode_nits(v * peak_nits) - lo) * inv);
    }
    return out;
}

double pu_psnr(const Image& estimate, const Image& truth, double peak_nits) {
    check_pair(estimate, truth, "pu_psnr");
    const double scale = std::max(1e-12, luminance_percentile(truth));
    const Image te = pu_encode(normalize_clip(estimate, scale), peak_nits);
    const Image tt = pu_encode(normalize_clip(truth, scale), peak_nits);
    return psnr_from_mse(mse(te, tt));
}

double pu_ssim(const Image& estimate, const Image& truth, double peak_nits) {
    check_pair(estimate, truth, "pu_ssim");
    const double scale = std::max(1e-12, luminance_percentile(truth));
    const Image te = pu_encode(to_luminance(normalize_clip(estimate, scale)), peak_nits);
    const Image tt = pu_encode(to_luminance(normalize_clip(truth, scale)), peak_nits);
    return ssim_core(te, tt);
}

QualityScores quality_scores(const Image& estimate, const Image& truth, double mu,
                             double peak_nits) {
    return QualityScores{psnr_mu(estimate, truth, mu), ssim_mu(estimate, truth, mu),
                         pu_psnr(estimate, truth, peak_nits),
                         pu_ssim(estimate, truth, peak_nits)};
}

namespace {

double population_std(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

DiversityScores diversity_metrics(const Image& hdr, double mu) {
    if (hdr.pixel_count() < 50)
        throw std::invalid_argument("diversity_metrics: need at least 50 pixels");

    DiversityScores s;
    const Image ylum = to_luminance(hdr);
    const double p999 = luminance_percentile(hdr);
    s.degenerate = p999 <= 0.0;
    const double scale = std::max(1e-12, p999);

    const size_t n = ylum.data.size();
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = ylum.data[i] / scale;

    // extent of HDR
    size_t highlight = 0;
    double excess = 0.0;
    for (double v : y) {
        if (v > 0.9) {
            ++highlight;
            excess += v - 0.9;
        }
    }
    s.fhlp = static_cast<double>(highlight) / static_cast<double>(n);
    s.ehl = std::clamp(excess / (0.1 * static_cast<double>(n)), 0.0, 1.0);

    // tonemapped luminance stats
    std::vector<double> ty(n);
    const double denom = std::log(1.0 + mu);
    for (size_t i = 0; i < n; ++i)
        ty[i] = std::log(1.0 + mu * std::clamp(y[i], 0.0, 1.0)) / denom;
    s.all = std::accumulate(ty.begin(), ty.end(), 0.0) / static_cast<double>(n);
    s.stdl = population_std(ty, s.all);

    // spatial information: std of Sobel magnitude of tonemapped luminance
    {
        const int h = ylum.height, w = ylum.width;
        std::vector<double> mag(n);
        for (int yy = 0; yy < h; ++yy) {
            const int yu = clampi(yy - 1, 0, h - 1), yd = clampi(yy + 1, 0, h - 1);
            for (int xx = 0; xx < w; ++xx) {
                const int xl = clampi(xx - 1, 0, w - 1), xr = clampi(xx + 1, 0, w - 1);
                auto at = [&](int yyy, int xxx) { return ty[static_cast<size_t>(yyy) * w + xxx]; };
                const double gx = (at(yu, xr) + 2.0 * at(yy, xr) + at(yd, xr)) -
                                  (at(yu, xl) + 2.0 * at(yy, xl) + at(yd, xl));
                const double gy = (at(yd, xl) + 2.0 * at(yd, xx) + at(yd, xr)) -
                                  (at(yu, xl) + 2.0 * at(yu, xx) + at(yu, xr));
                mag[static_cast<size_t>(yy) * w + xx] = std::hypot(gx, gy);
            }
        }
        const double m = std::accumulate(mag.begin(), mag.end(), 0.0) / static_cast<double>(n);
        s.si = population_std(mag, m);
    }

    // colorfulness (Hasler-Suesstrunk) on tonemapped channels
    if (hdr.channels == 3) {
        const Image norm = normalize_clip(hdr, scale);
        const Image tm = mu_tonemap(norm, mu);
        std::vector<double> rg(n), yb(n);
        for (size_t i = 0; i < n; ++i) {
            const double r = tm.plane(0)[i], g = tm.plane(1)[i], b = tm.plane(2)[i];
            rg[i] = r - g;
            yb[i] = 0.5 * (r + g) - b;
        }
        const double mrg = std::accumulate(rg.begin(), rg.end(), 0.0) / static_cast<double>(n);
        const double myb = std::accumulate(yb.begin(), yb.end(), 0.0) / static_cast<double>(n);
        const double srg = population_std(rg, mrg);
        const double syb = population_std(yb, myb);
        s.cf = std::hypot(srg, syb) + 0.3 * std::hypot(mrg, myb);
    }

    // dynamic range: top vs bottom 2% luminance, floored before logs
    {
        std::vector<double> sorted(y);
        std::sort(sorted.begin(), sorted.end());
        const size_t k = std::max<size_t>(1, n / 50);
        double lo = 0.0, hi = 0.0;
        for (size_t i = 0; i < k; ++i) {
            lo += std::max(1e-6, sorted[i]);
            hi += std::max(1e-6, sorted[n - 1 - i]);
        }
        s.dr = s.degenerate ? 0.0
                            : std::log10(hi / static_cast<double>(k)) -
                                  std::log10(lo / static_cast<double>(k));
    }
    return s;
}

namespace {

std::string fmt_sig6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double round_sig6(double v) { return std::atof(fmt_sig6(v).c_str()); }

MetricReport build_report(std::string mode, std::vector<std::string> columns,
                          std::vector<std::vector<double>> raw_rows,
                          std::vector<std::string> frame_ids) {
    if (raw_rows.empty())
        throw std::invalid_argument("dataset_report: empty frame list");
    MetricReport rep;
    rep.mode = std::move(mode);
    rep.columns = std::move(columns);
    if (frame_ids.empty())
        for (size_t i = 0; i < raw_rows.size(); ++i) frame_ids.push_back(std::to_string(i));
    if (frame_ids.size() != raw_rows.size())
        throw std::invalid_argument("dataset_report: frame id count mismatch");
    rep.frame_ids = std::move(frame_ids);

    for (auto& row : raw_rows) {
        for (double& v : row) v = round_sig6(v);
        rep.rows.push_back(row);
    }
    const size_t nc = rep.columns.size();
    rep.mean.assign(nc, 0.0);
    rep.stddev.assign(nc, 0.0);
    for (size_t c = 0; c < nc; ++c) {
        std::vector<double> col;
        col.reserve(rep.rows.size());
        for (const auto& row : rep.rows) col.push_back(row[c]);
        const double m = std::accumulate(col.begin(), col.end(), 0.0) /
                         static_cast<double>(col.size());
        rep.mean[c] = round_sig6(m);
        rep.stddev[c] = round_sig6(population_std(col, m));
    }
    return rep;
}

} // namespace

MetricReport dataset_report(const std::vector<QualityScores>& rows,
                            const std::vector<std::string>& frame_ids) {
    std::vector<std::vector<double>> raw;
    raw.reserve(rows.size());
    for (const auto& r : rows) raw.push_back({r.psnr_mu, r.ssim_mu, r.pu_psnr, r.pu_ssim});
    return build_report("quality", {"psnr_mu", "ssim_mu", "pu_psnr", "pu_ssim"}, std::move(raw),
                        frame_ids);
}

MetricReport dataset_report(const std::vector<DiversityScores>& rows,
                            const std::vector<std::string>& frame_ids) {
    std::vector<std::vector<double>> raw;
    raw.reserve(rows.size());
    for (const auto& r : rows)
        raw.push_back({r.fhlp, r.ehl, r.si, r.cf, r.stdl, r.all, r.dr});
    return build_report("diversity", {"fhlp", "ehl", "si", "cf", "stdl", "all", "dr"},
                        std::move(raw), frame_ids);
}

void write_report_csv(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "frame_id";
    for (const auto& c : report.columns) out << "," << c;
    out << "\n";
    for (size_t r = 0; r < report.rows.size(); ++r) {
        out << report.frame_ids[r];
        for (double v : report.rows[r]) out << "," << fmt_sig6(v);
        out << "\n";
    }
    out << "mean";
    for (double v : report.mean) out << "," << fmt_sig6(v);
    out << "\nstddev";
    for (double v : report.stddev) out << "," << fmt_sig6(v);
    out << "\n";
}

std::string report_json_string(const MetricReport& report, const std::string& extra_object_json) {
    nlohmann::json j;
    j["mode"] = report.mode;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t r = 0; r < report.rows.size(); ++r) {
        nlohmann::json row;
        row["frame_id"] = report.frame_ids[r];
        for (size_t c = 0; c < report.columns.size(); ++c)
            row[report.columns[c]] = report.rows[r][c];
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    nlohmann::json agg;
    for (size_t c = 0; c < report.columns.size(); ++c) {
        agg["mean"][report.columns[c]] = report.mean[c];
        agg["stddev"][report.columns[c]] = report.stddev[c];
    }
    j["aggregates"] = std::move(agg);
    if (!extra_object_json.empty()) {
        const nlohmann::json extra = nlohmann::json::parse(extra_object_json);
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    }
    return j.dump(2);
}

} // namespace hdrv
