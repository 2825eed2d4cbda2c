"""HTTP service over an immutable corpus, program model, and project.

Endpoints (JSON in, JSON out, stable field names):

* ``GET  /api/meta``   - corpus statistics
* ``GET  /api/files``  - indexed file list
* ``GET  /api/file?path=...`` - raw source text
* ``POST /api/query``  - {terms[], threshold, model?} -> scores + related terms
* ``POST /api/slice``  - {terms[], threshold, ipd_limit?, model?} -> per-file
  retained lines with origin reasons

Every request reads shared immutable state, so the service is stateless per
request: any sequence of requests leaves /api/meta unchanged, and identical
slice requests return identical bodies. Malformed requests get a 400 with a
message; unknown paths a 404. When a directory of built UI assets is given,
it is served at ``/``; the API works without any assets.
"""
from __future__ import annotations

import json
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import query as query_mod
from . import slicer, store
from .corpus import Corpus
from .progmodel import ProgramModel, build_program_model
from .project import SourceProject


class AppState:
    def __init__(self, corpus: Corpus, project: SourceProject, assets: str | None = None):
        self.corpus = corpus
        self.project = project
        self.model: ProgramModel = build_program_model(project)
        self.assets = Path(assets) if assets else None

    # -- handlers -------------------------------------------------------------

    def meta(self) -> dict:
        red = self.corpus.reduction
        return {
            "terms": len(self.corpus.terms),
            "documents": len(self.corpus.documents),
            "files": len(self.corpus.file_hashes),
            "weighting": self.corpus.weighting,
            "reduction": {"rank": red.rank} if red else None,
            "fingerprint": self.corpus.project_fingerprint,
            "format_version": store.VERSION,
        }

    def files(self) -> dict:
        return {"files": [rel for rel, _h in self.corpus.file_hashes]}

    def file_text(self, path: str) -> dict:
        try:
            return {"path": path, "text": self.project.file_text(path)}
        except KeyError:
            raise ApiError(404, f"no such file: {path}")

    def _parse_query(self, body: dict) -> tuple[query_mod.Query, str]:
        terms = body.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ApiError(400, "terms must be a non-empty list of strings")
        threshold = body.get("threshold")
        if not isinstance(threshold, (int, float)):
            raise ApiError(400, "threshold must be a number")
        model = body.get("model", "auto")
        try:
            q = query_mod.Query(
                tuple(str(t).strip().lower() for t in terms), float(threshold)
            )
            model = query_mod.resolve_model(self.corpus, model)
        except query_mod.QueryError as exc:
            raise ApiError(400, str(exc))
        return q, model

    def query(self, body: dict) -> dict:
        q, model = self._parse_query(body)
        try:
            result = query_mod.slice_corpus(self.corpus, q, model)
        except query_mod.QueryError as exc:
            raise ApiError(400, str(exc))
        by_id = {d.id: d for d in self.corpus.documents}
        return {
            "model": model,
            "documents": [
                {
                    "id": doc_id,
                    "score": score,
                    "kind": by_id[doc_id].kind,
                    "name": by_id[doc_id].name,
                    "file": by_id[doc_id].file,
                }
                for doc_id, score in result.retained_documents
            ],
            "related_terms": {
                term: [
                    {"file": l.file, "line": l.line, "column": l.column, "context": l.context}
                    for l in locs
                ]
                for term, locs in sorted(result.related_terms.items())
            },
            "diagnostics": list(result.diagnostics),
        }

    def slice(self, body: dict) -> dict:
        q, model = self._parse_query(body)
        ipd = body.get("ipd_limit", slicer.DEFAULT_IPD_LIMIT)
        if not isinstance(ipd, int) or ipd < 0:
            raise ApiError(400, "ipd_limit must be a non-negative integer")
        try:
            corpus_slice = query_mod.slice_corpus(self.corpus, q, model)
        except query_mod.QueryError as exc:
            raise ApiError(400, str(exc))
        feature = slicer.extract_feature(
            self.model, self.project, corpus_slice, ipd_limit=ipd
        )
        return {
            "model": model,
            "files": {
                rel: {
                    "lines": feature.lines[rel],
                    "origins": {str(ln): feature.origins[rel].get(ln, "?")
                                for ln in feature.lines[rel]},
                }
                for rel in sorted(feature.lines)
            },
            "diagnostics": list(feature.state.diagnostics),
        }


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def make_handler(state: AppState):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            pass

        def _send_json(self, status: int, payload: dict) -> None:
            data = json.dumps(payload, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _send_asset(self, rel: str) -> None:
            path = (state.assets / rel).resolve()
            if state.assets is None or not str(path).startswith(str(state.assets.resolve())) \
                    or not path.is_file():
                self._send_json(404, {"error": f"unknown path: /{rel}"})
                return
            data = path.read_bytes()
            ctype = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            url = urlparse(self.path)
            try:
                if url.path == "/api/meta":
                    self._send_json(200, state.meta())
                elif url.path == "/api/files":
                    self._send_json(200, state.files())
                elif url.path == "/api/file":
                    params = parse_qs(url.query)
                    paths = params.get("path")
                    if not paths:
                        raise ApiError(400, "missing path parameter")
                    self._send_json(200, state.file_text(paths[0]))
                elif state.assets is not None:
                    rel = url.path.lstrip("/") or "index.html"
                    self._send_asset(rel)
                elif url.path == "/":
                    self._send_json(200, {
                        "service": "fex",
                        "endpoints": ["/api/meta", "/api/files", "/api/file",
                                      "/api/query", "/api/slice"],
                    })
                else:
                    raise ApiError(404, f"unknown path: {url.path}")
            except ApiError as exc:
                self._send_json(exc.status, {"error": exc.message})

        def do_POST(self):
            url = urlparse(self.path)
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw.decode("utf-8")) if raw else {}
                except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                    raise ApiError(400, f"malformed JSON body: {exc}")
                if not isinstance(body, dict):
                    raise ApiError(400, "request body must be a JSON object")
                if url.path == "/api/query":
                    self._send_json(200, state.query(body))
                elif url.path == "/api/slice":
                    self._send_json(200, state.slice(body))
                else:
                    raise ApiError(404, f"unknown path: {url.path}")
            except ApiError as exc:
                self._send_json(exc.status, {"error": exc.message})

    return Handler


def make_server(
    corpus: Corpus,
    project: SourceProject,
    host: str = "127.0.0.1",
    port: int = 0,
    assets: str | None = None,
) -> ThreadingHTTPServer:
    state = AppState(corpus, project, assets)
    return ThreadingHTTPServer((host, port), make_handler(state))


def run_server(corpus, project, host, port, assets=None) -> None:
    server = make_server(corpus, project, host, port, assets)
    actual_port = server.server_address[1]
    print(f"fex service listening on http://{host}:{actual_port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
