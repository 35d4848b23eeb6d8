#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "gait/checkpoint.hpp"
#include "gait/errors.hpp"
#include "gait/evaluation.hpp"
#include "gait/gait_index.hpp"
#include "gait/histogram.hpp"
#include "gait/synth.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

gait::PointCloud cloud_from_array(const Array& points) {
    const auto buf = points.request();
    if (buf.ndim != 2 || buf.shape[1] != 3)
        throw std::invalid_argument("points must have shape (n, 3)");
    gait::PointCloud cloud;
    const auto* data = static_cast<const double*>(buf.ptr);
    cloud.points.reserve(static_cast<std::size_t>(buf.shape[0]));
    for (py::ssize_t i = 0; i < buf.shape[0]; ++i)
        cloud.points.push_back({data[3 * i], data[3 * i + 1], data[3 * i + 2]});
    return cloud;
}

// Accepts (n, d) or (n, rows, cols); flattens row-major.
gait::Batch batch_from_array(const Array& hists, std::size_t expected_dim) {
    const auto buf = hists.request();
    std::size_t n = 0, dim = 0;
    if (buf.ndim == 2) {
        n = static_cast<std::size_t>(buf.shape[0]);
        dim = static_cast<std::size_t>(buf.shape[1]);
    } else if (buf.ndim == 3) {
        n = static_cast<std::size_t>(buf.shape[0]);
        dim = static_cast<std::size_t>(buf.shape[1] * buf.shape[2]);
    } else {
        throw std::invalid_argument("histograms must have shape (n, d) or (n, rows, cols)");
    }
    if (expected_dim != 0 && dim != expected_dim)
        throw std::invalid_argument("histogram dimension " + std::to_string(dim) +
                                    " does not match the model input " +
                                    std::to_string(expected_dim));
    const auto* data = static_cast<const double*>(buf.ptr);
    gait::Batch xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        xs.emplace_back(data + i * dim, data + (i + 1) * dim);
    return xs;
}

gait::ScoredSet scored_set(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels must have equal length");
    gait::ScoredSet s;
    s.scores = scores;
    s.labels.reserve(labels.size());
    for (int l : labels) s.labels.push_back(l ? gait::Label::abnormal : gait::Label::normal);
    return s;
}

Array array_2d(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
    Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    std::memcpy(out.request().ptr, flat.data(), flat.size() * sizeof(double));
    return out;
}

// A trained model bundled with its prior, measure weights and index
// config; mirrors what a checkpoint file stores.
struct PyModel {
    gait::AaeModel model;
    gait::PriorSpec prior;
    gait::MeasureWeights weights;
    gait::IndexConfig index_cfg;
    std::vector<gait::EpochLosses> history;
};

PyModel train_model(const Array& hists, std::size_t epochs, std::size_t batch_size,
                    std::uint64_t seed, std::size_t hidden, std::size_t latent,
                    double lr_ae, double lr_d, double lr_q, double gamma0, double gamma_decay,
                    double prior_sigma2, double exponent_u, double leaky_slope) {
    const gait::Batch xs = batch_from_array(hists, 0);
    if (xs.empty()) throw std::invalid_argument("empty training set");

    gait::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.lr_ae = lr_ae;
    cfg.lr_d = lr_d;
    cfg.lr_q = lr_q;
    cfg.gamma0 = gamma0;
    cfg.gamma_decay = gamma_decay;
    cfg.prior_sigma2 = prior_sigma2;
    cfg.seed = seed;
    cfg.stable_window = std::min<std::size_t>(100, epochs);

    PyModel out;
    out.prior = {latent, prior_sigma2};
    out.index_cfg.exponent = exponent_u;

    const gait::AaeArch arch{xs.front().size(), hidden, latent, leaky_slope};
    gait::Rng init_rng(gait::Rng::derive(seed, 0));
    out.model = gait::make_aae(arch, init_rng);
    {
        py::gil_scoped_release release;
        gait::Trainer trainer(out.model, cfg);
        for (std::size_t e = 0; e < epochs; ++e) trainer.run_epoch(xs);
        out.history = trainer.history();
        const auto measures = gait::measure_frames(out.model, out.prior, xs);
        out.weights = gait::compute_weights(measures, out.index_cfg);
    }
    return out;
}

Array score_many(const PyModel& m, const Array& hists) {
    const gait::Batch xs = batch_from_array(hists, m.model.arch.input);
    std::vector<double> flat;
    flat.reserve(xs.size() * 4);
    for (const auto& x : xs) {
        gait::FrameMeasures fm;
        const auto z = gait::encode(m.model, x);
        const auto xhat = gait::decode(m.model, z);
        fm.recon = gait::measure_recon(x, xhat);
        fm.prior = gait::measure_prior(z, m.prior);
        fm.disc = gait::discriminate(m.model, z);
        fm.combined = gait::combine(fm, m.weights, m.index_cfg);
        flat.insert(flat.end(), {fm.recon, fm.prior, fm.disc, fm.combined});
    }
    return array_2d(flat, xs.size(), 4);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Walking-gait normality index: cylindrical histograms, adversarial "
              "auto-encoder scoring and ROC/EER evaluation";

    py::register_exception<gait::Error>(m, "GaitError");

    m.def(
        "fit_cylinder",
        [](const Array& points) {
            const gait::CylinderFrame cyl = gait::fit_cylinder(cloud_from_array(points));
            return py::make_tuple(py::make_tuple(cyl.centroid_x, cyl.centroid_y), cyl.z_min,
                                  cyl.z_max, cyl.radius);
        },
        py::arg("points"),
        "Fit the bounding cylinder; returns ((cx, cy), z_min, z_max, radius).");

    m.def(
        "raw_histogram",
        [](const Array& points, std::size_t rows, std::size_t cols) {
            const gait::PointCloud cloud = cloud_from_array(points);
            const gait::RawHistogram raw =
                gait::compute_raw_histogram(cloud, gait::fit_cylinder(cloud), rows, cols);
            py::array_t<std::uint64_t> out(
                {static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
            std::memcpy(out.request().ptr, raw.counts.data(),
                        raw.counts.size() * sizeof(std::uint64_t));
            return out;
        },
        py::arg("points"), py::arg("rows") = 16, py::arg("cols") = 16,
        "Per-sector point counts (rows = height bands, cols = angular sectors).");

    m.def(
        "extract_histogram",
        [](const Array& points, std::size_t rows, std::size_t cols) {
            const gait::Histogram hist =
                gait::extract_histogram(cloud_from_array(points), rows, cols);
            return array_2d(hist.values, rows, cols);
        },
        py::arg("points"), py::arg("rows") = 16, py::arg("cols") = 16,
        "Normalized 256-level cylindrical histogram, max bin scaled to 1.");

    m.def(
        "generate_sequence",
        [](std::uint64_t seed, std::size_t n_frames, std::size_t points_per_frame,
           std::size_t cycle_frames, double swing_amp, double sole_lift_left,
           double sole_lift_right, double speed_scale_left, double speed_scale_right,
           double noise_sigma, double height_scale, double phase_offset) {
            gait::GaitParams p;
            p.seed = seed;
            p.points_per_frame = points_per_frame;
            p.cycle_frames = cycle_frames;
            p.swing_amp_left = swing_amp;
            p.swing_amp_right = swing_amp;
            p.sole_lift_left = sole_lift_left;
            p.sole_lift_right = sole_lift_right;
            p.speed_scale_left = speed_scale_left;
            p.speed_scale_right = speed_scale_right;
            p.noise_sigma = noise_sigma;
            p.height_scale = height_scale;
            p.phase_offset = phase_offset;
            const auto frames = gait::generate_sequence(p, n_frames);
            py::list out;
            for (const gait::PointCloud& cloud : frames) {
                std::vector<double> flat;
                flat.reserve(cloud.points.size() * 3);
                for (const gait::Point3& pt : cloud.points)
                    flat.insert(flat.end(), {pt.x, pt.y, pt.z});
                out.append(array_2d(flat, cloud.points.size(), 3));
            }
            return out;
        },
        py::arg("seed"), py::arg("n_frames"), py::arg("points_per_frame") = 1400,
        py::arg("cycle_frames") = 26, py::arg("swing_amp") = 0.30,
        py::arg("sole_lift_left") = 0.0, py::arg("sole_lift_right") = 0.0,
        py::arg("speed_scale_left") = 1.0, py::arg("speed_scale_right") = 1.0,
        py::arg("noise_sigma") = 0.02, py::arg("height_scale") = 1.0,
        py::arg("phase_offset") = 0.0,
        "Synthetic walking sequence; one (n, 3) array per frame.");

    py::class_<PyModel>(m, "Model")
        .def_static("train", &train_model, py::arg("histograms"), py::arg("epochs") = 100,
                    py::arg("batch_size") = 64, py::arg("seed") = 0, py::arg("hidden") = 96,
                    py::arg("latent") = 16, py::arg("lr_ae") = 1e-3, py::arg("lr_d") = 1e-2,
                    py::arg("lr_q") = 1e-4, py::arg("gamma0") = 0.1,
                    py::arg("gamma_decay") = 0.99, py::arg("prior_sigma2") = 1.0,
                    py::arg("exponent_u") = 0.125, py::arg("leaky_slope") = 0.2,
                    "Train on flattened normal-gait histograms (n, d) or (n, rows, cols).")
        .def_property_readonly("latent_dim", [](const PyModel& m) { return m.model.arch.latent; })
        .def_property_readonly("input_dim", [](const PyModel& m) { return m.model.arch.input; })
        .def_property_readonly("weights",
                               [](const PyModel& m) {
                                   return py::make_tuple(m.weights.w_recon, m.weights.w_prior,
                                                         m.weights.w_disc);
                               })
        .def_property_readonly("history",
                               [](const PyModel& m) {
                                   std::vector<double> flat;
                                   flat.reserve(m.history.size() * 3);
                                   for (const auto& e : m.history)
                                       flat.insert(flat.end(), {e.ae, e.d, e.q});
                                   return array_2d(flat, m.history.size(), 3);
                               })
        .def("encode",
             [](const PyModel& m, const std::vector<double>& x) {
                 return gait::encode(m.model, x);
             })
        .def("reconstruct",
             [](const PyModel& m, const std::vector<double>& x) {
                 return gait::decode(m.model, gait::encode(m.model, x));
             })
        .def("discriminate",
             [](const PyModel& m, const std::vector<double>& z) {
                 return gait::discriminate(m.model, z);
             })
        .def("score", &score_many, py::arg("histograms"),
             "Per-frame measures as an (n, 4) array: y_ae, y_p, y_d, combined.")
        .def("save",
             [](const PyModel& m, const std::string& path) {
                 gait::Checkpoint ckpt;
                 ckpt.epoch = static_cast<std::uint32_t>(m.history.size());
                 ckpt.model = m.model;
                 ckpt.prior = m.prior;
                 ckpt.index_cfg = m.index_cfg;
                 ckpt.weights = m.weights;
                 ckpt.history = m.history;
                 const std::size_t n_ae =
                     m.model.encoder.param_count() + m.model.decoder.param_count();
                 ckpt.adam_ae_m.assign(n_ae, 0.0);
                 ckpt.adam_ae_v.assign(n_ae, 0.0);
                 ckpt.adam_q_m.assign(m.model.encoder.param_count(), 0.0);
                 ckpt.adam_q_v.assign(m.model.encoder.param_count(), 0.0);
                 gait::save_checkpoint(path, ckpt);
             })
        .def_static("load", [](const std::string& path) {
            gait::Checkpoint ckpt = gait::load_checkpoint(path);
            PyModel m;
            m.model = std::move(ckpt.model);
            m.prior = ckpt.prior;
            m.weights = ckpt.weights;
            m.index_cfg = ckpt.index_cfg;
            m.history = std::move(ckpt.history);
            return m;
        });

    m.def(
        "auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return gait::auc(scored_set(scores, labels));
        },
        py::arg("scores"), py::arg("labels"),
        "Area under the ROC curve; labels are 1 = abnormal, 0 = normal.");

    m.def(
        "eer",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return gait::eer(scored_set(scores, labels));
        },
        py::arg("scores"), py::arg("labels"), "Equal error rate from the ROC curve.");

    m.def(
        "roc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            const auto curve = gait::roc_curve(scored_set(scores, labels));
            std::vector<double> flat;
            flat.reserve(curve.size() * 2);
            for (const auto& p : curve) flat.insert(flat.end(), {p.fpr, p.tpr});
            return array_2d(flat, curve.size(), 2);
        },
        py::arg("scores"), py::arg("labels"), "ROC vertices as an (k, 2) array of (fpr, tpr).");

    m.def(
        "aggregate",
        [](const std::vector<double>& frame_scores, std::size_t delta, const std::string& mode) {
            gait::SegmentMode sm;
            if (mode == "nonoverlap")
                sm = gait::SegmentMode::non_overlapping;
            else if (mode == "sliding")
                sm = gait::SegmentMode::sliding;
            else
                throw std::invalid_argument("mode must be 'nonoverlap' or 'sliding'");
            return gait::aggregate(frame_scores, delta, sm);
        },
        py::arg("frame_scores"), py::arg("delta"), py::arg("mode") = "nonoverlap",
        "Segment means over delta consecutive frames.");
}
