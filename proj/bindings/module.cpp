// Python bindings for the main operations: data model, tokenizer, prototype
// selection, prompt generation, the seq2seq backbone, and metrics.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adaptgen/checkpoint.hpp"
#include "adaptgen/data.hpp"
#include "adaptgen/metrics.hpp"
#include "adaptgen/model.hpp"
#include "adaptgen/prompt.hpp"
#include "adaptgen/selector.hpp"
#include "adaptgen/tokenizer.hpp"

namespace py = pybind11;
using namespace adaptgen;

PYBIND11_MODULE(_adaptgen, m) {
  m.doc() = "Few-shot table-to-text pipeline: prototype-guided generation with "
            "adapter-based knowledge augmentation";

  py::class_<AttributeValuePair>(m, "AttributeValuePair")
      .def(py::init([](std::string a, std::string v) {
             return AttributeValuePair{std::move(a), std::move(v)};
           }),
           py::arg("attribute"), py::arg("value"))
      .def_readwrite("attribute", &AttributeValuePair::attribute)
      .def_readwrite("value", &AttributeValuePair::value);

  py::class_<Table>(m, "Table")
      .def(py::init([](std::string id, std::vector<std::pair<std::string, std::string>> pairs) {
             Table t;
             t.id = std::move(id);
             for (auto& [a, v] : pairs) t.pairs.push_back({std::move(a), std::move(v)});
             return t;
           }),
           py::arg("id"), py::arg("pairs"))
      .def_readwrite("id", &Table::id)
      .def_readwrite("pairs", &Table::pairs);

  m.def("linearize_table", &linearize_table, py::arg("table"));
  m.def("parse_dataset_record", &parse_dataset_record, py::arg("line"), py::arg("line_number") = 1);
  m.def("tokenize", &tokenize, py::arg("text"));

  py::class_<DatasetRecord>(m, "DatasetRecord")
      .def_readonly("table", &DatasetRecord::table)
      .def_property_readonly("reference",
                             [](const DatasetRecord& r) { return r.reference.text; });

  py::class_<Vocab>(m, "Vocab")
      .def_static("build", &Vocab::build, py::arg("corpus_texts"), py::arg("min_count") = 1)
      .def_static("load", &Vocab::load, py::arg("path"))
      .def("save", &Vocab::save, py::arg("path"))
      .def("id", &Vocab::id, py::arg("token"))
      .def("token", &Vocab::token, py::arg("id"))
      .def("__len__", &Vocab::size)
      .def("encode", &Vocab::encode, py::arg("text"))
      .def("decode",
           [](const Vocab& v, const std::vector<int>& ids) { return v.decode(ids); },
           py::arg("ids"));

  py::class_<EntitySpan>(m, "EntitySpan")
      .def_readonly("start", &EntitySpan::start)
      .def_readonly("end", &EntitySpan::end)
      .def_readonly("source_attribute", &EntitySpan::source_attribute)
      .def_readonly("matched_value", &EntitySpan::matched_value);

  py::class_<MaskedPrompt>(m, "MaskedPrompt")
      .def_readonly("masked_tokens", &MaskedPrompt::masked_tokens)
      .def_readonly("target_tokens", &MaskedPrompt::target_tokens)
      .def_readonly("table_id", &MaskedPrompt::table_id);

  m.def("detect_entities", &detect_entities, py::arg("sentence_tokens"), py::arg("table"));
  m.def("mask_entities", &mask_entities, py::arg("sentence_tokens"), py::arg("spans"),
        py::arg("table_id"), py::arg("max_masks") = -1);
  m.def("unmask", &unmask, py::arg("prompt"));

  py::class_<PrototypeSet::Member>(m, "PrototypeMember")
      .def_readonly("sentence", &PrototypeSet::Member::sentence)
      .def_readonly("score", &PrototypeSet::Member::score)
      .def_readonly("corpus_index", &PrototypeSet::Member::corpus_index);

  py::class_<PrototypeSet>(m, "PrototypeSet")
      .def_readonly("table_id", &PrototypeSet::table_id)
      .def_readonly("members", &PrototypeSet::members)
      .def_readonly("n", &PrototypeSet::n)
      .def("sentences", &PrototypeSet::sentences);

  py::class_<SelectorConfig>(m, "SelectorConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &SelectorConfig::vocab_size)
      .def_readwrite("d_model", &SelectorConfig::d_model)
      .def_readwrite("n_heads", &SelectorConfig::n_heads)
      .def_readwrite("n_layers", &SelectorConfig::n_layers)
      .def_readwrite("d_ffn", &SelectorConfig::d_ffn)
      .def_readwrite("max_positions", &SelectorConfig::max_positions);

  py::class_<PrototypeSelector<float>>(m, "PrototypeSelector")
      .def_static("init", &PrototypeSelector<float>::init, py::arg("config"), py::arg("seed"))
      .def("score_candidate", &PrototypeSelector<float>::score_candidate, py::arg("table"),
           py::arg("sentence"), py::arg("vocab"))
      .def("select_prototypes", &PrototypeSelector<float>::select_prototypes, py::arg("table"),
           py::arg("candidates"), py::arg("n"), py::arg("vocab"))
      .def("prototype_selection_loss", &PrototypeSelector<float>::prototype_selection_loss,
           py::arg("table"), py::arg("reference"), py::arg("negatives"), py::arg("vocab"));

  m.def("sample_negatives", &sample_negatives, py::arg("candidates"), py::arg("reference"),
        py::arg("k"), py::arg("seed"));
  m.def("hinge_ranking_loss", &hinge_ranking_loss, py::arg("positive_score"),
        py::arg("negative_scores"));

  py::enum_<AdapterPlacement>(m, "AdapterPlacement")
      .value("EVERY_LAYER", AdapterPlacement::EveryLayer)
      .value("FINAL_LAYER_ONLY", AdapterPlacement::FinalLayerOnly)
      .value("NONE", AdapterPlacement::None);

  py::enum_<FreezePolicy>(m, "FreezePolicy")
      .value("ALL_TRAINABLE", FreezePolicy::AllTrainable)
      .value("ADAPTER_ONLY", FreezePolicy::AdapterOnly)
      .value("ADAPTER_FROZEN", FreezePolicy::AdapterFrozen);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("d_model", &ModelConfig::d_model)
      .def_readwrite("n_heads", &ModelConfig::n_heads)
      .def_readwrite("n_encoder_layers", &ModelConfig::n_encoder_layers)
      .def_readwrite("n_decoder_layers", &ModelConfig::n_decoder_layers)
      .def_readwrite("d_ffn", &ModelConfig::d_ffn)
      .def_readwrite("d_bottleneck", &ModelConfig::d_bottleneck)
      .def_readwrite("adapter_placement", &ModelConfig::adapter_placement)
      .def_readwrite("adapter_activation", &ModelConfig::adapter_activation)
      .def_readwrite("max_positions", &ModelConfig::max_positions);

  py::class_<Seq2SeqModel<float>>(m, "Seq2SeqModel")
      .def_static("init", &Seq2SeqModel<float>::init, py::arg("config"), py::arg("seed"))
      .def("greedy_decode", &Seq2SeqModel<float>::greedy_decode, py::arg("src"),
           py::arg("max_len"))
      .def("apply_freeze_policy",
           [](Seq2SeqModel<float>& m, FreezePolicy p) { m.params.apply_freeze_policy(p); },
           py::arg("policy"))
      .def("parameter_count",
           [](const Seq2SeqModel<float>& m) { return m.params.parameter_count(); })
      .def("save_checkpoint",
           [](const Seq2SeqModel<float>& m, const std::string& path) {
             save_checkpoint(m.params, path);
           },
           py::arg("path"))
      .def("load_checkpoint",
           [](Seq2SeqModel<float>& m, const std::string& path) {
             load_checkpoint_into(m.params, path);
           },
           py::arg("path"));

  py::class_<PRF>(m, "PRF")
      .def_readonly("precision", &PRF::precision)
      .def_readonly("recall", &PRF::recall)
      .def_readonly("f1", &PRF::f1);

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("bleu4", &MetricReport::bleu4)
      .def_readonly("rouge4_precision", &MetricReport::rouge4_precision)
      .def_readonly("rouge4_recall", &MetricReport::rouge4_recall)
      .def_readonly("rouge4_f1", &MetricReport::rouge4_f1)
      .def_readonly("parent_precision", &MetricReport::parent_precision)
      .def_readonly("parent_recall", &MetricReport::parent_recall)
      .def_readonly("parent_f1", &MetricReport::parent_f1)
      .def_readonly("n_examples", &MetricReport::n_examples);

  py::class_<ParentConfig>(m, "ParentConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &ParentConfig::lambda)
      .def_readwrite("max_ngram", &ParentConfig::max_ngram);

  m.def("bleu4", &bleu4, py::arg("hypotheses"), py::arg("references"));
  m.def("rouge4", &rouge4, py::arg("hypotheses"), py::arg("references"));
  m.def("parent_f", &parent_f, py::arg("hypotheses"), py::arg("references"), py::arg("tables"),
        py::arg("config") = ParentConfig{});
  m.def("evaluate_all", &evaluate_all, py::arg("hypotheses"), py::arg("references"),
        py::arg("tables"), py::arg("config") = ParentConfig{});

  py::class_<EntityOverlap>(m, "EntityOverlap")
      .def_readonly("supported", &EntityOverlap::supported)
      .def_readonly("contradicted", &EntityOverlap::contradicted);
  m.def("entity_overlap_report", &entity_overlap_report, py::arg("hypothesis"), py::arg("table"));
}
