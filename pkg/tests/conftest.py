import pytest

from refform.corpus import parse_corpus

from corpus_helpers import chef_doc_record, write_corpus_file


@pytest.fixture
def chef_corpus(tmp_path):
    path = write_corpus_file(tmp_path, [chef_doc_record()])
    return parse_corpus(path)
