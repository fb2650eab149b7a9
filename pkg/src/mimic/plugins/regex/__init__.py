"""Regular expressions as typed pattern terms, compiled through NFA and
minimal-DFA construction down to ordinary recursive matcher functions."""
