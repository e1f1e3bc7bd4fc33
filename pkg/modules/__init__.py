# schlafli-lab modules package