#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "anchorattn/anchor_pass.hpp"
#include "anchorattn/baselines.hpp"
#include "anchorattn/metrics.hpp"
#include "anchorattn/oracle.hpp"
#include "anchorattn/sparse_exec.hpp"
#include "anchorattn/stripe_identify.hpp"
#include "anchorattn/workload_io.hpp"
#include "anchorattn/workloads.hpp"

namespace py = pybind11;
using namespace anchorattn;

namespace {

Matrix matrix_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(m.data.data(), a.data(), m.data.size() * sizeof(float));
    return m;
}

py::array_t<float> array_from_matrix(const Matrix& m) {
    py::array_t<float> a({m.rows, m.cols});
    std::memcpy(a.mutable_data(), m.data.data(), m.data.size() * sizeof(float));
    return a;
}

HeadWorkload workload_from_arrays(const py::array_t<float>& q, const py::array_t<float>& k,
                                  const py::array_t<float>& v) {
    return HeadWorkload::create(matrix_from_array(q), matrix_from_array(k),
                                matrix_from_array(v));
}

SelectionMask mask_from_rows(std::size_t n,
                             const std::vector<std::vector<std::uint32_t>>& rows) {
    if (rows.size() != n) throw std::invalid_argument("row count must equal n");
    SelectionMask m(n);
    m.rows = rows;
    m.normalize();
    return m;
}

}  // namespace

PYBIND11_MODULE(anchorattn, m) {
    m.doc() = "Difference-aware stripe-sparse causal attention with a dense oracle";

    py::class_<BlockConfig>(m, "BlockConfig")
        .def(py::init([](std::size_t b_q, std::size_t b_kv, std::size_t step,
                         double theta) {
                 BlockConfig cfg;
                 cfg.b_q = b_q;
                 cfg.b_kv = b_kv;
                 cfg.step = step;
                 cfg.theta = theta;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("b_q") = 128, py::arg("b_kv") = 128, py::arg("step") = 16,
             py::arg("theta") = 12.0)
        .def_readwrite("b_q", &BlockConfig::b_q)
        .def_readwrite("b_kv", &BlockConfig::b_kv)
        .def_readwrite("step", &BlockConfig::step)
        .def_readwrite("theta", &BlockConfig::theta);

    py::class_<HeadWorkload>(m, "HeadWorkload")
        .def(py::init(&workload_from_arrays), py::arg("q"), py::arg("k"), py::arg("v"))
        .def_property_readonly("n", [](const HeadWorkload& w) { return w.n; })
        .def_property_readonly("d", [](const HeadWorkload& w) { return w.d; })
        .def_property_readonly("q", [](const HeadWorkload& w) { return array_from_matrix(w.q); })
        .def_property_readonly("k", [](const HeadWorkload& w) { return array_from_matrix(w.k); })
        .def_property_readonly("v", [](const HeadWorkload& w) { return array_from_matrix(w.v); });

    py::class_<SelectionMask>(m, "SelectionMask")
        .def(py::init(&mask_from_rows), py::arg("n"), py::arg("rows"))
        .def_property_readonly("n", [](const SelectionMask& mask) { return mask.n; })
        .def_property_readonly("rows", [](const SelectionMask& mask) { return mask.rows; })
        .def("total_selected", &SelectionMask::total_selected)
        .def_static("full_causal", &SelectionMask::full_causal)
        .def_static("empty", &SelectionMask::empty);

    py::class_<RunStats>(m, "RunStats")
        .def_readonly("computed_positions", &RunStats::computed_positions)
        .def_readonly("causal_positions", &RunStats::causal_positions)
        .def_readonly("sparsity", &RunStats::sparsity)
        .def_readonly("recall", &RunStats::recall);

    py::class_<StripeIndex>(m, "StripeIndex")
        .def_property_readonly("groups",
                               [](const StripeIndex& idx) { return idx.groups; })
        .def("total_selected", &StripeIndex::total_selected);

    // Oracle surface.
    m.def("dense_scores",
          [](const py::array_t<float>& q, const py::array_t<float>& k) {
              return array_from_matrix(dense_scores(matrix_from_array(q),
                                                    matrix_from_array(k)));
          },
          py::arg("q"), py::arg("k"));
    m.def("dense_probs",
          [](const py::array_t<float>& q, const py::array_t<float>& k) {
              return array_from_matrix(dense_probs(matrix_from_array(q),
                                                   matrix_from_array(k)));
          },
          py::arg("q"), py::arg("k"));
    m.def("dense_attention",
          [](const HeadWorkload& w) { return array_from_matrix(dense_attention(w).o); },
          py::arg("workload"));
    m.def("masked_attention",
          [](const HeadWorkload& w, const SelectionMask& mask) {
              return array_from_matrix(masked_attention(w, mask).o);
          },
          py::arg("workload"), py::arg("mask"));

    // Sparse pipeline.
    m.def("anchor_attention",
          [](const HeadWorkload& w, const BlockConfig& cfg, bool zero_anchor) {
              const SparseResult res = anchor_attention(w, cfg, zero_anchor);
              return py::make_tuple(array_from_matrix(res.out.o), res.stats);
          },
          py::arg("workload"), py::arg("config") = BlockConfig{},
          py::arg("zero_anchor") = false);
    m.def("identify_stripes",
          [](const HeadWorkload& w, const BlockConfig& cfg) {
              const AnchorState state = compute_anchor(w, cfg);
              return identify_stripes(w, state, cfg);
          },
          py::arg("workload"), py::arg("config"));
    m.def("union_mask", &union_mask, py::arg("stripes"), py::arg("config"), py::arg("n"));
    m.def("anchor_mask", &anchor_mask, py::arg("n"), py::arg("config"));

    // Baseline selectors over oracle maps.
    m.def("select_topk",
          [](const py::array_t<float>& p, std::size_t k, std::size_t row_span,
             std::size_t col_span) {
              return select_topk(matrix_from_array(p), k, {row_span, col_span});
          },
          py::arg("probs"), py::arg("k"), py::arg("row_span") = 1,
          py::arg("col_span") = 1);
    m.def("select_topcdf",
          [](const py::array_t<float>& p, double gamma, std::size_t row_span,
             std::size_t col_span) {
              return select_topcdf(matrix_from_array(p), gamma, {row_span, col_span});
          },
          py::arg("probs"), py::arg("gamma"), py::arg("row_span") = 1,
          py::arg("col_span") = 1);
    m.def("select_diff_aware",
          [](const py::array_t<float>& s, double theta, std::size_t row_span,
             std::size_t col_span) {
              return select_diff_aware(matrix_from_array(s), theta,
                                       {row_span, col_span});
          },
          py::arg("scores"), py::arg("theta"), py::arg("row_span") = 1,
          py::arg("col_span") = 1);
    m.def("streaming_mask", &streaming_mask, py::arg("n"), py::arg("init_tokens"),
          py::arg("local_tokens"));

    // Metrics.
    m.def("recall",
          [](const SelectionMask& mask, const py::array_t<float>& p) {
              return recall(mask, matrix_from_array(p));
          },
          py::arg("mask"), py::arg("probs"));
    m.def("sparsity", &sparsity, py::arg("mask"));

    // Workload generation and file IO.
    m.def("gen_random", &gen_random, py::arg("n"), py::arg("d"), py::arg("heads"),
          py::arg("seed"));
    m.def("gen_sink_local", &gen_sink_local, py::arg("n"), py::arg("d"),
          py::arg("sink_strength"), py::arg("window"), py::arg("seed"));
    m.def("gen_planted_stripes",
          [](std::size_t n, std::size_t d, const std::vector<std::size_t>& cols,
             double mass_fraction, std::uint64_t seed,
             std::optional<std::pair<std::size_t, std::size_t>> vanish) {
              std::optional<VanishRange> range;
              if (vanish) range = VanishRange{vanish->first, vanish->second};
              return gen_planted_stripes(n, d, cols, mass_fraction, seed, range);
          },
          py::arg("n"), py::arg("d"), py::arg("stripe_cols"), py::arg("mass_fraction"),
          py::arg("seed"), py::arg("vanish") = std::nullopt);
    m.def("write_workload", &write_workload, py::arg("path"), py::arg("heads"));
    m.def("read_workload", &read_workload, py::arg("path"));
}
