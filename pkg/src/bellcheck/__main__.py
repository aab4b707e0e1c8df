from bellcheck.cli.main import run

run()
