#include "figlabel/template_match.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>

#include "figlabel/error.hpp"

namespace figlabel {

double template_scale(int k) {
  return kTemplateScaleMin +
         k * (kTemplateScaleMax - kTemplateScaleMin) / (kTemplateScaleCount - 1);
}

bool accept_figure_match(const TemplateMatch& m) {
  return m.score >= kFigureMatchThreshold;
}

namespace {

// FFTW planning is not thread safe; execution on distinct buffers is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Cross-correlation surfaces for one page, computed once and reused across
// the 45 scales: the page spectrum plus integral images for window sums.
class PageCorrelator {
 public:
  explicit PageCorrelator(const GrayImage& page)
      : w_(page.width),
        h_(page.height),
        spec_size_(static_cast<std::size_t>(h_) * (w_ / 2 + 1)),
        sum_(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0.0),
        sum_sq_(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0.0) {
    real_ = fftw_alloc_real(static_cast<std::size_t>(w_) * h_);
    spec_ = fftw_alloc_complex(spec_size_);
    page_spec_ = fftw_alloc_complex(spec_size_);
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      forward_ = fftw_plan_dft_r2c_2d(h_, w_, real_, spec_, FFTW_ESTIMATE);
      inverse_ = fftw_plan_dft_c2r_2d(h_, w_, spec_, real_, FFTW_ESTIMATE);
    }

    std::copy(page.values.begin(), page.values.end(), real_);
    fftw_execute(forward_);
    std::memcpy(page_spec_, spec_, spec_size_ * sizeof(fftw_complex));

    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        const double v = page.at(x, y);
        sum_at(x + 1, y + 1) = v + sum_at(x, y + 1) + sum_at(x + 1, y) - sum_at(x, y);
        sq_at(x + 1, y + 1) = v * v + sq_at(x, y + 1) + sq_at(x + 1, y) - sq_at(x, y);
      }
    }
  }

  ~PageCorrelator() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
    fftw_free(page_spec_);
  }

  PageCorrelator(const PageCorrelator&) = delete;
  PageCorrelator& operator=(const PageCorrelator&) = delete;

  int width() const { return w_; }
  int height() const { return h_; }

  // Raw correlation map: corr(x, y) = sum_{u,v} T(u,v) * P(x+u, y+v).
  // Computed circularly over the page grid; entries are only read for
  // placements where the template fits, which are wraparound-free.
  void correlate(const GrayImage& tmpl, std::vector<double>& corr_out) {
    std::fill(real_, real_ + static_cast<std::size_t>(w_) * h_, 0.0);
    for (int y = 0; y < tmpl.height; ++y) {
      for (int x = 0; x < tmpl.width; ++x) {
        real_[static_cast<std::size_t>(y) * w_ + x] = tmpl.at(x, y);
      }
    }
    fftw_execute(forward_);
    const double norm = 1.0 / (static_cast<double>(w_) * h_);
    for (std::size_t i = 0; i < spec_size_; ++i) {
      // conj(T) * P, scaled for the unnormalized inverse transform.
      const std::complex<double> t(spec_[i][0], spec_[i][1]);
      const std::complex<double> p(page_spec_[i][0], page_spec_[i][1]);
      const std::complex<double> r = std::conj(t) * p * norm;
      spec_[i][0] = r.real();
      spec_[i][1] = r.imag();
    }
    fftw_execute(inverse_);
    corr_out.assign(real_, real_ + static_cast<std::size_t>(w_) * h_);
  }

  double window_sum(int x, int y, int tw, int th) const {
    return sum_at(x + tw, y + th) - sum_at(x, y + th) - sum_at(x + tw, y) +
           sum_at(x, y);
  }
  double window_sum_sq(int x, int y, int tw, int th) const {
    return sq_at(x + tw, y + th) - sq_at(x, y + th) - sq_at(x + tw, y) +
           sq_at(x, y);
  }

 private:
  double& sum_at(int x, int y) { return sum_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double sum_at(int x, int y) const { return sum_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double& sq_at(int x, int y) { return sum_sq_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double sq_at(int x, int y) const { return sum_sq_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_, h_;
  std::size_t spec_size_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_complex* page_spec_ = nullptr;
  fftw_plan forward_{};
  fftw_plan inverse_{};
  std::vector<double> sum_, sum_sq_;
};

// Total squared variation below this counts as a flat (zero-variance) patch.
constexpr double kVarianceFloor = 1.0;

}  // namespace

TemplateMatch match_template_multiscale(const GrayImage& page_gray,
                                        const GrayImage& template_gray) {
  if (page_gray.width <= 0 || page_gray.height <= 0 ||
      template_gray.width <= 0 || template_gray.height <= 0) {
    throw Error("empty raster");
  }

  PageCorrelator correlator(page_gray);
  const int pw = page_gray.width;
  const int ph = page_gray.height;
  const bool wide = template_gray.width >= template_gray.height;

  bool found = false;
  TemplateMatch best;
  std::vector<double> corr;

  for (int k = 0; k < kTemplateScaleCount; ++k) {
    const double s = template_scale(k);
    const int page_dim = wide ? pw : ph;
    const int tmpl_dim = wide ? template_gray.width : template_gray.height;
    const int target_main = static_cast<int>(std::lround(s * page_dim));
    if (target_main < 1) continue;
    const double factor = static_cast<double>(target_main) / tmpl_dim;
    const int tw = wide ? target_main
                        : std::max(1, static_cast<int>(std::lround(
                                          template_gray.width * factor)));
    const int th = wide ? std::max(1, static_cast<int>(std::lround(
                                          template_gray.height * factor)))
                        : target_main;
    if (tw > pw || th > ph) continue;

    const GrayImage tmpl = resize(template_gray, tw, th);
    const double n = static_cast<double>(tw) * th;
    double t_sum = 0.0, t_sum_sq = 0.0;
    for (double v : tmpl.values) {
      t_sum += v;
      t_sum_sq += v * v;
    }
    const double t_var = std::max(0.0, t_sum_sq - t_sum * t_sum / n);

    correlator.correlate(tmpl, corr);

    for (int y = 0; y + th <= ph; ++y) {
      for (int x = 0; x + tw <= pw; ++x) {
        double score = 0.0;
        if (t_var > kVarianceFloor) {
          const double w_sum = correlator.window_sum(x, y, tw, th);
          const double w_var =
              std::max(0.0, correlator.window_sum_sq(x, y, tw, th) -
                                w_sum * w_sum / n);
          if (w_var > kVarianceFloor) {
            const double numerator =
                corr[static_cast<std::size_t>(y) * pw + x] - t_sum * w_sum / n;
            score = numerator / std::sqrt(t_var * w_var);
            score = std::clamp(score, -1.0, 1.0);
          }
        }
        if (!found || score > best.score) {
          found = true;
          best.score = score;
          best.scale = s;
          best.bbox = BBox{double(x), double(y), double(x + tw), double(y + th)};
        }
      }
    }
  }

  if (!found) throw Error("template does not fit page");
  return best;
}

}  // namespace figlabel
