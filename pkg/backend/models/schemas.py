"""
Marshmallow schemas for the on-disk artifact formats
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

from marshmallow import EXCLUDE, Schema, ValidationError, fields, post_load, validate

from errors import SchemaError
from models.network import PROVENANCES, ConceptEdge, ConceptNetwork, ConceptNode


def first_error_path(messages: Any, prefix: str = '') -> tuple:
    """Walk marshmallow's nested error dict down to the first leaf, returning (dotted path, message)"""
    if isinstance(messages, dict):
        key = sorted(messages, key=str)[0]
        path = f'{prefix}.{key}' if prefix else str(key)
        return first_error_path(messages[key], path)
    if isinstance(messages, list) and messages:
        if all(isinstance(m, str) for m in messages):
            return prefix or '<root>', messages[0]
        return first_error_path(messages[0], prefix)
    return prefix or '<root>', str(messages)


class NodeSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    id = fields.Int(required=True, validate=validate.Range(min=0))
    title = fields.Str(required=True, validate=validate.Length(min=1))
    year = fields.Int(required=True, strict=True)
    provenance = fields.Str(load_default='parsed', validate=validate.OneOf(PROVENANCES))
    tfidf = fields.List(fields.Tuple((fields.Int(), fields.Float())), load_default=list)

    @post_load
    def make_node(self, data, **kwargs):
        data['tfidf'] = {int(k): float(v) for k, v in data['tfidf']}
        return ConceptNode(**data)


class EdgeSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    source = fields.Int(required=True)
    target = fields.Int(required=True)
    weight = fields.Float(required=True, validate=validate.Range(min=0.0, max=1.0))

    @post_load
    def make_edge(self, data, **kwargs):
        return ConceptEdge(**data)


class NullSchema(Schema):
    kind = fields.Str(required=True, validate=validate.OneOf(('rewired', 'jittered', 'simulated')))
    seed = fields.Int(required=True)
    original_subject = fields.Str(load_default=None, allow_none=True)


class NetworkSchema(Schema):
    """Network JSON: subject, nodes, edges, vocab and an optional null-model stanza"""

    class Meta:
        unknown = EXCLUDE

    subject = fields.Str(required=True)
    nodes = fields.List(fields.Nested(NodeSchema), required=True)
    edges = fields.List(fields.Nested(EdgeSchema), required=True)
    vocab = fields.List(fields.Str(), load_default=list)
    null = fields.Nested(NullSchema, load_default=None, allow_none=True)

    @post_load
    def make_network(self, data, **kwargs):
        return ConceptNetwork(**data)


def network_from_dict(data: Dict[str, Any]) -> ConceptNetwork:
    try:
        return NetworkSchema().load(data)
    except ValidationError as e:
        path, message = first_error_path(e.messages)
        raise SchemaError(path, message) from e


def serialize_network(network: ConceptNetwork, path: Union[str, Path]) -> Path:
    """Write network JSON; output is byte-stable for identical networks"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(network.to_dict(), indent=1, sort_keys=True, ensure_ascii=False)
    path.write_text(text + '\n', encoding='utf-8')
    return path


def deserialize_network(path: Union[str, Path]) -> ConceptNetwork:
    with open(path, encoding='utf-8') as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError('<root>', f'invalid JSON: {e.msg}') from e
    if not isinstance(data, dict):
        raise SchemaError('<root>', 'network must be a JSON object')
    return network_from_dict(data)


class MiniArticleSchema(Schema):
    class Meta:
        unknown = EXCLUDE

    title = fields.Str(required=True, validate=validate.Length(min=1))
    lead = fields.Str(load_default='')
    links = fields.List(fields.Str(), load_default=list)
    history = fields.Str(load_default=None, allow_none=True)
    years = fields.List(fields.Int(strict=True), load_default=None, allow_none=True)


class MiniCorpusSchema(Schema):
    """Mini-corpus JSON: articles, subject member lists and Nobel titles"""

    class Meta:
        unknown = EXCLUDE

    articles = fields.List(fields.Nested(MiniArticleSchema), required=True)
    subjects = fields.Dict(keys=fields.Str(), values=fields.List(fields.Str()), required=True)
    nobel = fields.List(fields.Str(), load_default=list)


def load_mini_corpus_dict(data: Dict[str, Any]) -> Dict[str, Any]:
    try:
        return MiniCorpusSchema().load(data)
    except ValidationError as e:
        path, message = first_error_path(e.messages)
        raise SchemaError(path, message) from e
