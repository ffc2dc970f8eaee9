#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "afrisynth/corpus.hpp"
#include "afrisynth/error.hpp"
#include "afrisynth/eval.hpp"
#include "afrisynth/minhash.hpp"
#include "afrisynth/numerals.hpp"
#include "afrisynth/pipeline.hpp"
#include "afrisynth/util.hpp"

namespace py = pybind11;
using namespace afrisynth;

namespace {

DedupParams params_from(std::size_t shingle_size, double threshold, std::size_t num_perms, std::size_t bands,
                        std::size_t rows, std::uint64_t seed) {
    DedupParams p;
    p.shingle_size = shingle_size;
    p.threshold = threshold;
    p.num_perms = num_perms;
    p.bands = bands;
    p.rows = rows;
    p.seed = seed;
    p.validate();
    return p;
}

std::vector<TextItem> text_items(const std::vector<std::pair<std::string, std::string>>& items) {
    std::vector<TextItem> out;
    out.reserve(items.size());
    for (const auto& [id, text] : items) out.push_back({id, text});
    return out;
}

py::list drops(const std::vector<DroppedPair>& pairs) {
    py::list out;
    for (const auto& d : pairs) out.append(py::make_tuple(d.dropped_id, d.kept_id, d.estimate));
    return out;
}

EvalItem eval_item(const py::dict& d) {
    auto get = [&](const char* key) { return d.contains(key) ? py::cast<std::string>(d[key]) : std::string(); };
    return {get("item_id"), get("language"), get("question"), get("gold_answer"), get("generation")};
}

}  // namespace

PYBIND11_MODULE(_afrisynth, m) {
    m.doc() = "Native core of the afrisynth data pipeline";

    py::register_exception<Error>(m, "Error");

    m.def("content_id", [](const std::vector<std::string>& parts) { return content_id(parts); });
    m.def("word_count", &word_count);
    m.def("truncate_words", &truncate_words, py::arg("text"), py::arg("limit") = 200);

    m.def("shingles", &shingles, py::arg("text"), py::arg("k") = 3);

    py::class_<MinHashSignature>(m, "MinHashSignature")
        .def_readonly("seed", &MinHashSignature::seed)
        .def_readonly("values", &MinHashSignature::values)
        .def("__len__", &MinHashSignature::num_perms)
        .def("__eq__", [](const MinHashSignature& a, const MinHashSignature& b) { return a == b; });

    m.def("minhash", &minhash, py::arg("shingles"), py::arg("num_perms") = 256, py::arg("seed") = 1);
    m.def("estimate_jaccard", &estimate_jaccard);

    m.def(
        "dedup",
        [](const std::vector<std::pair<std::string, std::string>>& items, double threshold, std::size_t shingle_size,
           std::size_t num_perms, std::size_t bands, std::size_t rows, std::uint64_t seed) {
            const auto r = dedup(text_items(items), params_from(shingle_size, threshold, num_perms, bands, rows, seed));
            return py::make_tuple(r.kept_ids, drops(r.dropped));
        },
        py::arg("items"), py::arg("threshold") = 0.8, py::arg("shingle_size") = 3, py::arg("num_perms") = 256,
        py::arg("bands") = 32, py::arg("rows") = 8, py::arg("seed") = 1,
        "items: [(id, text)]. Returns (kept_ids, [(dropped_id, kept_id, estimate)]).");

    m.def(
        "decontaminate",
        [](const std::vector<std::pair<std::string, std::string>>& train, const std::vector<std::string>& eval_set,
           double threshold, std::uint64_t seed) {
            const auto r = decontaminate(text_items(train), eval_set, params_from(3, threshold, 256, 32, 8, seed));
            return py::make_tuple(r.kept_ids, drops(r.removed));
        },
        py::arg("train"), py::arg("eval_set"), py::arg("threshold") = 0.8, py::arg("seed") = 1);

    m.def("extract_final_answer", &extract_final_answer);

    m.def("parse_verdict", [](std::string_view raw) -> py::object {
        const auto v = parse_verdict(raw);
        if (!v) return py::none();
        return py::make_tuple(v->score, v->reasoning);
    });
    m.def("exact_match", [](const py::dict& item) { return exact_match(eval_item(item)).score; },
          "item: dict with gold_answer and generation. Returns 0 or 1.");

    // Returns the report as JSON text; the python wrapper decodes it.
    m.def(
        "score_run_json",
        [](const std::vector<py::dict>& items, const std::vector<std::tuple<std::string, int, bool>>& verdicts,
           const std::set<std::string>& excluded) {
            std::vector<EvalItem> is;
            for (const auto& d : items) is.push_back(eval_item(d));
            std::vector<JudgeVerdict> vs;
            for (const auto& [id, score, scored] : verdicts) {
                JudgeVerdict v;
                v.item_id = id;
                v.score = score;
                v.scored = scored;
                vs.push_back(v);
            }
            return score_run(is, vs, excluded).to_json().dump();
        },
        py::arg("items"), py::arg("verdicts"), py::arg("excluded") = std::set<std::string>{"eng", "fra"});

    m.def("stages", [] {
        std::vector<std::string> out;
        for (Stage s : all_stages()) out.emplace_back(to_string(s));
        return out;
    });

    m.def(
        "run_stage",
        [](const std::string& stage, const std::string& config_path, std::optional<std::uint64_t> seed,
           bool dry_run) {
            const auto s = parse_stage(stage);
            if (!s) throw Error(ErrorKind::Config, "unknown stage '" + stage + "'");
            const auto config = load_config(config_path, seed);
            RunOptions options;
            options.dry_run = dry_run;
            StageOutcome out;
            {
                py::gil_scoped_release release;
                out = run_stage(*s, config, options);
            }
            return py::make_tuple(out.exit_code, out.summary);
        },
        py::arg("stage"), py::arg("config"), py::arg("seed") = py::none(), py::arg("dry_run") = false);
}
