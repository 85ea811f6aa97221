// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// hravatar._core: thin binding over the C++ runtime. Cameras, poses, configs
// and timings cross the boundary as JSON strings; hravatar/__init__.py wraps
// them as dicts.
//
#include "hra/io.hpp"
#include "hra/pipeline.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using nlohmann::json;

namespace {

py::array_t<std::uint8_t> to_array(const hra::Image &img) {
    py::array_t<std::uint8_t> out({py::ssize_t(img.height), py::ssize_t(img.width), py::ssize_t(4)});
    std::copy(img.rgba.begin(), img.rgba.end(), out.mutable_data());
    return out;
}

hra::CodecProfile parse_profile(const std::string &name) {
    if (name == "standard") return hra::CodecProfile::standard;
    if (name == "aggressive") return hra::CodecProfile::aggressive;
    throw std::invalid_argument("unknown codec profile '" + name + "'");
}

hra::Framing parse_framing(const std::string &name) {
    if (name == "full_body") return hra::Framing::full_body;
    if (name == "upper_body") return hra::Framing::upper_body;
    throw std::invalid_argument("unknown framing '" + name + "'");
}

class PyRenderer {
  public:
    PyRenderer(std::shared_ptr<const hra::AvatarAsset> asset, const std::string &config)
        : asset_(asset), renderer_(asset, config.empty() ? hra::RenderConfig{} : hra::config_from_json(json::parse(config))) {}

    py::tuple render(const std::string &poses, std::size_t frame, const std::string &camera) {
        const auto pose = pick(poses, frame);
        const auto cam  = hra::camera_from_json(json::parse(camera));
        hra::FrameResult r;
        {
            py::gil_scoped_release release;
            r = renderer_.render(pose, cam);
        }
        return py::make_tuple(to_array(r.image), hra::to_json(r.timings).dump());
    }

    py::tuple render_stereo(const std::string &poses, std::size_t frame, const std::string &stereo) {
        const auto pose = pick(poses, frame);
        const auto rig  = hra::stereo_from_json(json::parse(stereo));
        hra::StereoResult r;
        {
            py::gil_scoped_release release;
            r = renderer_.render_stereo(pose, rig);
        }
        return py::make_tuple(to_array(r.left), to_array(r.right), hra::to_json(r.timings).dump());
    }

  private:
    hra::Pose pick(const std::string &poses, std::size_t frame) const {
        auto seq = hra::pose_sequence_from_json(json::parse(poses), asset_->skeleton.size());
        if (frame >= seq.frames.size()) throw py::index_error("frame " + std::to_string(frame) + " out of range");
        return std::move(seq.frames[frame]);
    }

    std::shared_ptr<const hra::AvatarAsset> asset_;
    hra::AvatarRenderer renderer_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hravatar runtime";

    py::register_exception<hra::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<hra::FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<hra::IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<hra::SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<hra::DimensionError>(m, "DimensionError", PyExc_ValueError);

    py::class_<hra::AvatarAsset, std::shared_ptr<hra::AvatarAsset>>(m, "Asset")
        .def_property_readonly("splat_count", &hra::AvatarAsset::splat_count)
        .def_property_readonly("vertex_count", &hra::AvatarAsset::vertex_count)
        .def_property_readonly("triangle_count", &hra::AvatarAsset::triangle_count)
        .def_property_readonly("joint_count", [](const hra::AvatarAsset &a) { return a.skeleton.size(); })
        .def_property_readonly("compressed",
                               [](const hra::AvatarAsset &a) { return std::holds_alternative<hra::ChunkedSplatBuffer>(a.splats); })
        .def_property_readonly("compression_ratio",
                               [](const hra::AvatarAsset &a) -> py::object {
                                   if (const auto *b = std::get_if<hra::ChunkedSplatBuffer>(&a.splats))
                                       return py::float_(b->ratio());
                                   return py::none();
                               })
        .def("save", [](const hra::AvatarAsset &a, const std::filesystem::path &p) { hra::save_asset(a, p); })
        .def("to_bytes",
             [](const hra::AvatarAsset &a) {
                 const auto b = hra::save_asset_bytes(a);
                 return py::bytes(reinterpret_cast<const char *>(b.data()), b.size());
             })
        .def("validate",
             [](const hra::AvatarAsset &a) {
                 std::vector<std::string> out;
                 for (const auto &v : hra::validate_asset(a).violations)
                     out.push_back(v.rule + ": " + v.record + " " + std::to_string(v.index) + " " + v.detail);
                 return out;
             })
        .def("compress",
             [](const hra::AvatarAsset &a, const std::string &profile) {
                 const auto *raw = std::get_if<hra::SplatAttributes>(&a.splats);
                 if (!raw) throw std::invalid_argument("asset is already compressed");
                 auto out    = std::make_shared<hra::AvatarAsset>(a);
                 out->splats = hra::compress_splats(*raw, parse_profile(profile));
                 return out;
             },
             py::arg("profile") = "standard")
        .def("arm_raise",
             [](const hra::AvatarAsset &a, std::size_t frames) {
                 return hra::to_json(hra::arm_raise_sequence(a.skeleton, frames)).dump();
             },
             py::arg("frames") = 60);

    m.def(
        "generate",
        [](std::size_t splats, std::uint64_t seed, std::size_t vertices, bool garment) {
            hra::SyntheticSpec spec;
            spec.splat_count   = splats;
            spec.seed          = seed;
            spec.vertex_budget = vertices;
            spec.garment       = garment;
            py::gil_scoped_release release;
            return std::make_shared<hra::AvatarAsset>(hra::generate_synthetic_asset(spec));
        },
        py::arg("splats") = hra::SyntheticSpec{}.splat_count, py::arg("seed") = hra::SyntheticSpec{}.seed,
        py::arg("vertices") = hra::SyntheticSpec{}.vertex_budget, py::arg("garment") = true);

    m.def("load", [](const std::filesystem::path &p) { return std::make_shared<hra::AvatarAsset>(hra::load_asset(p)); });
    m.def("from_bytes", [](const py::bytes &b) {
        const std::string s = b;
        return std::make_shared<hra::AvatarAsset>(hra::load_asset_bytes(std::vector<std::uint8_t>(s.begin(), s.end())));
    });

    m.def(
        "avatar_camera",
        [](std::uint32_t w, std::uint32_t h, const std::string &framing) {
            return hra::to_json(hra::avatar_camera(w, h, parse_framing(framing))).dump();
        },
        py::arg("width"), py::arg("height"), py::arg("framing") = "full_body");
    m.def(
        "stereo_from_center",
        [](const std::string &camera, float baseline) {
            return hra::to_json(hra::StereoCamera::from_center(hra::camera_from_json(json::parse(camera)), baseline)).dump();
        },
        py::arg("camera"), py::arg("baseline") = 0.064f);
    m.def("default_config", [] { return hra::to_json(hra::RenderConfig{}).dump(); });

    py::class_<PyRenderer>(m, "Renderer")
        .def(py::init<std::shared_ptr<const hra::AvatarAsset>, const std::string &>(), py::arg("asset"),
             py::arg("config") = "")
        .def("render", &PyRenderer::render, py::arg("poses"), py::arg("frame"), py::arg("camera"))
        .def("render_stereo", &PyRenderer::render_stereo, py::arg("poses"), py::arg("frame"), py::arg("stereo"));
}
