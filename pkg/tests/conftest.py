import functools

import pytest

from tierlang.corpus import entries, load_source
from tierlang.pipeline import analyze, compile_source


@functools.lru_cache(maxsize=None)
def corpus_source(name: str) -> str:
    for e in entries():
        if e.name == name:
            return load_source(e.file)
    raise KeyError(name)


@functools.lru_cache(maxsize=None)
def corpus_compiled(name: str):
    return compile_source(corpus_source(name), name)


@functools.lru_cache(maxsize=None)
def corpus_analysis(name: str):
    return analyze(corpus_source(name), name)


@pytest.fixture
def get_source():
    return corpus_source


@pytest.fixture
def get_compiled():
    return corpus_compiled


@pytest.fixture
def get_analysis():
    return corpus_analysis
