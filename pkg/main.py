from qsw_app.controllers.cliController import cli

# Entry point: python main.py scan --topology chain --size 100 --alphas 0.1,1.0

if __name__ == '__main__':
    cli()
