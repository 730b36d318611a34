from phoneclass.experiments.cli import entry

entry()
