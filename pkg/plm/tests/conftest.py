import pytest

from refform_plm.corpus_io import read_corpus

from cue_helpers import chef_record, write_records


@pytest.fixture
def chef_documents(tmp_path):
    return read_corpus(write_records(tmp_path / "chef.jsonl", [chef_record()]))
