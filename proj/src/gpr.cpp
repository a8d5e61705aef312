#include "btm/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "btm/errors.hpp"
#include "btm/panel_io.hpp"

namespace btm {

GprInput make_gpr_input(double g_s, HourStamp stamp) {
    GprInput x;
    x.g_s = g_s;
    x.hour_scaled = hour_of_day(stamp) / 23.0;
    x.day_scaled = (day_of_year(stamp) - 1) / 365.0;
    return x;
}

double se_kernel(const GprInput& a, const GprInput& b, double sigma_f, double length) {
    if (!(sigma_f > 0.0) || !(length > 0.0))
        throw ConfigError("se_kernel: hyperparameters must be positive");
    double d0 = a.g_s - b.g_s;
    double d1 = a.hour_scaled - b.hour_scaled;
    double d2 = a.day_scaled - b.day_scaled;
    double sq = d0 * d0 + d1 * d1 + d2 * d2;
    return sigma_f * sigma_f * std::exp(-sq / (2.0 * length * length));
}

namespace {

Eigen::MatrixXd to_matrix(const std::vector<GprInput>& inputs) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(inputs.size()), 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, 0) = inputs[static_cast<std::size_t>(i)].g_s;
        m(i, 1) = inputs[static_cast<std::size_t>(i)].hour_scaled;
        m(i, 2) = inputs[static_cast<std::size_t>(i)].day_scaled;
    }
    return m;
}

// Pairwise squared distances, computed once per training set so the CV grid
// only re-exponentiates.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    Eigen::VectorXd norms = x.rowwise().squaredNorm();
    Eigen::MatrixXd d = norms.replicate(1, x.rows()) + norms.transpose().replicate(x.rows(), 1) -
                        2.0 * x * x.transpose();
    return d.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& sqdist, double sigma_f, double length) {
    return (sigma_f * sigma_f) * (-sqdist / (2.0 * length * length)).array().exp().matrix();
}

// Cholesky with x10 jitter escalation up to 1e-2.
std::pair<Eigen::LLT<Eigen::MatrixXd>, double> factorize_with_escalation(const Eigen::MatrixXd& k,
                                                                         double jitter) {
    Eigen::MatrixXd work = k;
    double j = jitter;
    while (true) {
        work = k;
        work.diagonal().array() += j;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) return {std::move(llt), j};
        if (j > 1e-2) throw SolverError("gpr: covariance factorization failed even at jitter 1e-2");
        j = (j <= 0.0) ? 1e-10 : j * 10.0;
    }
}

struct CvScore {
    double rmse = 0.0;
    bool ok = false;
};

CvScore cross_validate(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& y, double sigma_f,
                       double length, double jitter, int folds) {
    const Eigen::Index n = y.size();
    double total_sq = 0.0;
    Eigen::Index total_count = 0;
    for (int fold = 0; fold < folds; ++fold) {
        std::vector<Eigen::Index> train_idx, val_idx;
        for (Eigen::Index i = 0; i < n; ++i)
            ((i % folds) == fold ? val_idx : train_idx).push_back(i);
        if (train_idx.empty() || val_idx.empty()) continue;

        Eigen::MatrixXd k_tt(train_idx.size(), train_idx.size());
        for (std::size_t a = 0; a < train_idx.size(); ++a)
            for (std::size_t b = 0; b < train_idx.size(); ++b)
                k_tt(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    sqdist(train_idx[a], train_idx[b]);
        k_tt = kernel_from_distances(k_tt, sigma_f, length);

        Eigen::VectorXd y_t(train_idx.size());
        for (std::size_t a = 0; a < train_idx.size(); ++a) y_t(static_cast<Eigen::Index>(a)) = y(train_idx[a]);
        double mean = y_t.mean();
        y_t.array() -= mean;

        Eigen::LLT<Eigen::MatrixXd> llt;
        try {
            llt = factorize_with_escalation(k_tt, jitter).first;
        } catch (const SolverError&) {
            return {};
        }
        Eigen::VectorXd alpha = llt.solve(y_t);

        for (Eigen::Index v : val_idx) {
            double pred = mean;
            for (std::size_t a = 0; a < train_idx.size(); ++a) {
                double k = sigma_f * sigma_f *
                           std::exp(-sqdist(v, train_idx[a]) / (2.0 * length * length));
                pred += k * alpha(static_cast<Eigen::Index>(a));
            }
            double err = pred - y(v);
            total_sq += err * err;
            ++total_count;
        }
    }
    if (total_count == 0) return {};
    return {std::sqrt(total_sq / static_cast<double>(total_count)), true};
}

} // namespace

GprModel GprModel::train(const std::vector<GprInput>& inputs, const std::vector<double>& targets,
                         const GprTrainOptions& options) {
    if (inputs.size() != targets.size()) throw AlignmentError("gpr: inputs/targets size mismatch");
    if (inputs.size() < 2) throw DegenerateDataError("gpr: need at least two training points");
    if (options.sigma_f_grid.empty() || options.length_grid.empty())
        throw ConfigError("gpr: empty hyperparameter grid");

    // Uniform-stride subsample to bound the O(n^3) solve.
    std::vector<GprInput> xs;
    std::vector<double> ys;
    if (inputs.size() > options.max_train && options.max_train >= 2) {
        std::size_t stride = (inputs.size() + options.max_train - 1) / options.max_train;
        for (std::size_t i = 0; i < inputs.size(); i += stride) {
            xs.push_back(inputs[i]);
            ys.push_back(targets[i]);
        }
    } else {
        xs = inputs;
        ys = targets;
    }

    GprModel model;
    model.inputs_ = to_matrix(xs);
    model.targets_ = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    model.jitter_ = options.jitter;

    Eigen::MatrixXd sqdist = squared_distances(model.inputs_);

    if (options.sigma_f_grid.size() * options.length_grid.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        bool any = false;
        for (double sf : options.sigma_f_grid) {
            for (double len : options.length_grid) {
                CvScore score = cross_validate(sqdist, model.targets_, sf, len, options.jitter,
                                               options.cv_folds);
                if (score.ok && score.rmse < best) {
                    best = score.rmse;
                    model.sigma_f_ = sf;
                    model.length_ = len;
                    any = true;
                }
            }
        }
        if (!any) throw SolverError("gpr: cross-validation failed for every hyperparameter combination");
    } else {
        model.sigma_f_ = options.sigma_f_grid.front();
        model.length_ = options.length_grid.front();
    }

    model.factorize();
    return model;
}

void GprModel::factorize() {
    Eigen::MatrixXd k = kernel_from_distances(squared_distances(inputs_), sigma_f_, length_);
    auto [llt, used_jitter] = factorize_with_escalation(k, jitter_);
    llt_ = std::move(llt);
    jitter_ = used_jitter;
    target_mean_ = targets_.mean();
    Eigen::VectorXd centered = targets_.array() - target_mean_;
    alpha_ = llt_.solve(centered);
}

namespace {

Eigen::VectorXd cross_kernel(const Eigen::MatrixXd& train, const GprInput& x, double sigma_f,
                             double length) {
    Eigen::RowVector3d q(x.g_s, x.hour_scaled, x.day_scaled);
    Eigen::VectorXd sq = (train.rowwise() - q).rowwise().squaredNorm();
    return (sigma_f * sigma_f) * (-sq / (2.0 * length * length)).array().exp().matrix();
}

} // namespace

double GprModel::predict_mean(const GprInput& x) const {
    return target_mean_ + cross_kernel(inputs_, x, sigma_f_, length_).dot(alpha_);
}

std::vector<double> GprModel::predict_mean(const std::vector<GprInput>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(predict_mean(x));
    return out;
}

double GprModel::predict_variance(const GprInput& x) const {
    Eigen::VectorXd k = cross_kernel(inputs_, x, sigma_f_, length_);
    return sigma_f_ * sigma_f_ - k.dot(llt_.solve(k));
}

void GprModel::save(const std::string& path) const {
    std::ostringstream out;
    out << "# btm-gpr v1\n";
    out << "# label," << label << '\n';
    out << "# sigma_f," << format_kw(sigma_f_) << '\n';
    out << "# length," << format_kw(length_) << '\n';
    out << "# jitter," << format_kw(jitter_) << '\n';
    out << "g_s,hour_scaled,day_scaled,target\n";
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
        out << format_kw(inputs_(i, 0)) << ',' << format_kw(inputs_(i, 1)) << ','
            << format_kw(inputs_(i, 2)) << ',' << format_kw(targets_(i)) << '\n';
    write_file_atomic(path, out.str());
}

GprModel GprModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open gpr model '" + path + "'");

    GprModel model;
    std::vector<GprInput> xs;
    std::vector<double> ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t comma = line.find(',');
            if (comma == std::string::npos) continue;
            std::string key = line.substr(2, comma - 2);
            std::string value = line.substr(comma + 1);
            if (key == "label") model.label = value;
            else if (key == "sigma_f") model.sigma_f_ = std::stod(value);
            else if (key == "length") model.length_ = std::stod(value);
            else if (key == "jitter") model.jitter_ = std::stod(value);
            continue;
        }
        if (line.rfind("g_s,", 0) == 0) continue; // header row
        GprInput x;
        double y = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x.g_s, &x.hour_scaled, &x.day_scaled, &y) != 4)
            throw IoError("bad gpr model row in '" + path + "': " + line);
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 2) throw IoError("gpr model '" + path + "' has too few rows");

    model.inputs_ = to_matrix(xs);
    model.targets_ = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    model.factorize();
    return model;
}

GprModel train_azimuth_model(const HourlySeries& surrogate_south, const HourlySeries& surrogate_ns,
                             const std::string& label, const GprTrainOptions& options,
                             const DayNightMask& mask) {
    require_aligned(surrogate_south, surrogate_ns, "train_azimuth_model");

    // Weather attenuates neighbouring arrays by the same factor, so every
    // sun-up surrogate hour also teaches its uniformly dimmed versions; the
    // a = 0 rows anchor the overcast case (zero input -> zero candidate).
    // Dark diurnal-mask hours (winter evenings) enter once as exact zeros.
    static constexpr double attenuation_levels[] = {1.0, 0.65, 0.3, 0.0};
    constexpr std::size_t n_levels = std::size(attenuation_levels);

    std::vector<std::size_t> diurnal;
    std::size_t row_estimate = 0;
    for (std::size_t t = 0; t < surrogate_south.size(); ++t) {
        if (mask.is_night(hour_of_day(surrogate_south.stamp_at(t)))) continue;
        diurnal.push_back(t);
        row_estimate += (surrogate_south.values[t] > 0.0 || surrogate_ns.values[t] > 0.0)
                            ? n_levels
                            : 1;
    }
    if (diurnal.size() < 2) throw DegenerateDataError("train_azimuth_model: no diurnal hours");

    std::size_t stride = std::max<std::size_t>(
        1, (row_estimate + options.max_train - 1) / std::max<std::size_t>(2, options.max_train));

    std::vector<GprInput> inputs;
    std::vector<double> targets;
    for (std::size_t i = 0; i < diurnal.size(); i += stride) {
        std::size_t t = diurnal[i];
        bool sun_up = surrogate_south.values[t] > 0.0 || surrogate_ns.values[t] > 0.0;
        if (!sun_up) {
            inputs.push_back(make_gpr_input(0.0, surrogate_south.stamp_at(t)));
            targets.push_back(0.0);
            continue;
        }
        for (double a : attenuation_levels) {
            inputs.push_back(make_gpr_input(a * surrogate_south.values[t],
                                            surrogate_south.stamp_at(t)));
            targets.push_back(a * surrogate_ns.values[t]);
        }
    }
    GprModel model = GprModel::train(inputs, targets, options);
    model.label = label;
    return model;
}

HourlySeries infer_candidate(const GprModel& model, const HourlySeries& g_s,
                             const DayNightMask& mask) {
    HourlySeries out;
    out.start = g_s.start;
    out.values.resize(g_s.size());
    for (std::size_t t = 0; t < g_s.size(); ++t) {
        HourStamp stamp = g_s.stamp_at(t);
        if (mask.is_night(hour_of_day(stamp))) {
            out.values[t] = 0.0;
            continue;
        }
        double mean = model.predict_mean(make_gpr_input(g_s.values[t], stamp));
        out.values[t] = std::clamp(mean, 0.0, 1.0);
    }
    return out;
}

} // namespace btm
