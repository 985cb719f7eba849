#pragma once

// JSON encoding of layers: explicit shapes plus row-major weight arrays.

#include <string>

#include <json.hpp>

#include "radarnomaly/error.hpp"
#include "radarnomaly/nn/layers.hpp"

namespace radarnomaly::nn {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json(const Matrix& m) {
  OrderedJson j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = m.data;
  return j;
}

template <typename J>
Matrix matrix_from_json(const J& j) {
  Matrix m;
  m.rows = j.at("rows").template get<std::size_t>();
  m.cols = j.at("cols").template get<std::size_t>();
  m.data = j.at("data").template get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) throw Error(ErrorKind::shape_mismatch, "matrix data does not match shape");
  return m;
}

inline std::string to_string(Activation a) { return a == Activation::sigmoid ? "sigmoid" : "linear"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "linear") return Activation::linear;
  throw Error(ErrorKind::schema_violation, "unknown activation '" + s + "'");
}

inline OrderedJson to_json(const DenseLayer& layer) {
  OrderedJson j;
  j["type"] = "dense";
  j["activation"] = to_string(layer.activation);
  j["weights"] = to_json(layer.weights);
  j["bias"] = layer.bias;
  return j;
}

template <typename J>
DenseLayer dense_from_json(const J& j) {
  if (j.at("type").template get<std::string>() != "dense") throw Error(ErrorKind::schema_violation, "expected dense layer");
  DenseLayer layer;
  layer.activation = activation_from_string(j.at("activation").template get<std::string>());
  layer.weights = matrix_from_json(j.at("weights"));
  layer.bias = j.at("bias").template get<Vector>();
  require_size(layer.bias.size(), layer.weights.rows, "dense bias");
  return layer;
}

inline OrderedJson to_json(const EmbeddingLayer& layer) {
  OrderedJson j;
  j["type"] = "embedding";
  j["tables"] = layer.tables;
  return j;
}

template <typename J>
EmbeddingLayer embedding_from_json(const J& j) {
  if (j.at("type").template get<std::string>() != "embedding") {
    throw Error(ErrorKind::schema_violation, "expected embedding layer");
  }
  EmbeddingLayer layer;
  layer.tables = j.at("tables").template get<std::vector<Vector>>();
  return layer;
}

inline OrderedJson to_json(const LstmCell& cell) {
  OrderedJson j;
  j["type"] = "lstm";
  j["gate_order"] = "input,forget,candidate,output";
  j["input_weights"] = to_json(cell.input_weights);
  j["hidden_weights"] = to_json(cell.hidden_weights);
  j["bias"] = cell.bias;
  return j;
}

template <typename J>
LstmCell lstm_from_json(const J& j) {
  if (j.at("type").template get<std::string>() != "lstm") throw Error(ErrorKind::schema_violation, "expected lstm layer");
  LstmCell cell;
  cell.input_weights = matrix_from_json(j.at("input_weights"));
  cell.hidden_weights = matrix_from_json(j.at("hidden_weights"));
  cell.bias = j.at("bias").template get<Vector>();
  const std::size_t h = cell.hidden_weights.cols;
  if (cell.hidden_weights.rows != 4 * h || cell.input_weights.rows != 4 * h || cell.bias.size() != 4 * h) {
    throw Error(ErrorKind::shape_mismatch, "inconsistent LSTM gate shapes");
  }
  return cell;
}

}  // namespace radarnomaly::nn
