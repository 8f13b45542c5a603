from gsbm_lab.cli.handler import main
